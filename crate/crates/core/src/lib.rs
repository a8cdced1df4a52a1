//! Clustering of spelling variants of transliterated proper nouns.
//!
//! Tokens are grouped by affinity propagation over negative Levenshtein
//! similarities, clusters are pruned with a Jaro-Winkler threshold against
//! their exemplar, rejected tokens are re-clustered, and the result can be
//! scored against annotated truth with the Rand and adjusted Rand indices.

pub mod affinity;
pub mod evaluation;
pub mod generator;
pub mod io;
pub mod pipeline;
pub mod string_metrics;

pub use affinity::{run_affinity_propagation, ApConfig, ExemplarAssignment, SimilarityMatrix};
pub use evaluation::{evaluate, EvaluationReport, Labels, PairCounts};
pub use generator::{generate_corpus, GeneratedCorpus, GeneratorSpec};
pub use pipeline::{run_pipeline, ClusterBook, PipelineConfig, Token};
pub use string_metrics::{jaro, jaro_winkler, levenshtein, WinklerParams};
