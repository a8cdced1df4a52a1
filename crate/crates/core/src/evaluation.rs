//! Pair-counting comparison of a predicted clustering against annotated
//! truth: TP/FP/TN/FN over unordered token pairs, the Rand index and the
//! Hubert-Arabie adjusted Rand index.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::ClusterBook;

/// Token -> cluster label.
pub type Labels = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("clusterings cover different tokens (only predicted: {only_predicted:?}, only truth: {only_truth:?})")]
    TokenMismatch {
        only_predicted: Vec<String>,
        only_truth: Vec<String>,
    },
    #[error("label slices differ in length: {predicted} vs {truth}")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("pair metrics need at least two tokens, got {0}")]
    TooFewTokens(usize),
    #[error("no truth label for tokens: {0:?}")]
    MissingTruth(Vec<String>),
}

/// Agreement counts over all unordered token pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    /// Together in both clusterings.
    pub tp: u64,
    /// Together only in the prediction.
    pub fp: u64,
    /// Apart in both.
    pub tn: u64,
    /// Together only in the truth.
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Raw agreement of `(member, exemplar)` pairs with the truth, exemplars
/// themselves excluded. Diagnostic only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemplarPairCounts {
    #[serde(rename = "exemplar_pairs_matched")]
    pub matched: u64,
    #[serde(rename = "exemplar_pairs_unmatched")]
    pub unmatched: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(flatten)]
    pub counts: PairCounts,
    pub rand_index: f64,
    pub adjusted_rand_index: f64,
    pub expected_ri: f64,
    pub max_ri: f64,
    #[serde(flatten)]
    pub exemplar_pairs: ExemplarPairCounts,
}

fn comb2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Contingency table marginals reduced to pair sums.
#[derive(Debug, Clone, Copy)]
struct PairSums {
    n: u64,
    /// `sum_ij C(n_ij, 2)`
    joint: u64,
    /// `sum_i C(a_i, 2)` over predicted clusters
    predicted: u64,
    /// `sum_j C(b_j, 2)` over true clusters
    truth: u64,
}

impl PairSums {
    fn from_labels<P: Eq + Hash, T: Eq + Hash>(predicted: &[P], truth: &[T]) -> Result<Self, EvaluationError> {
        if predicted.len() != truth.len() {
            return Err(EvaluationError::LengthMismatch {
                predicted: predicted.len(),
                truth: truth.len(),
            });
        }
        let mut rows: HashMap<&P, u64> = HashMap::new();
        let mut cols: HashMap<&T, u64> = HashMap::new();
        let mut cells: HashMap<(&P, &T), u64> = HashMap::new();
        for (p, t) in predicted.iter().zip(truth) {
            *rows.entry(p).or_default() += 1;
            *cols.entry(t).or_default() += 1;
            *cells.entry((p, t)).or_default() += 1;
        }
        Ok(Self {
            n: predicted.len() as u64,
            joint: cells.values().copied().map(comb2).sum(),
            predicted: rows.values().copied().map(comb2).sum(),
            truth: cols.values().copied().map(comb2).sum(),
        })
    }

    fn counts(&self) -> PairCounts {
        let tp = self.joint;
        let fp = self.predicted - tp;
        let fn_ = self.truth - tp;
        PairCounts {
            tp,
            fp,
            fn_,
            tn: comb2(self.n) - tp - fp - fn_,
        }
    }

    /// `(index - expected) / (max - expected)` with
    /// `expected = sum_a * sum_b / C(n,2)` and `max = (sum_a + sum_b) / 2`,
    /// scaled by `2 C(n,2)` so the whole ratio is taken over integers.
    fn adjusted_rand_index(&self) -> f64 {
        let pairs = comb2(self.n) as i128;
        let (joint, a, b) = (self.joint as i128, self.predicted as i128, self.truth as i128);
        let numerator = 2 * (pairs * joint - a * b);
        let denominator = pairs * (a + b) - 2 * a * b;
        if denominator == 0 {
            let c = self.counts();
            return if c.fp == 0 && c.fn_ == 0 { 1.0 } else { 0.0 };
        }
        numerator as f64 / denominator as f64
    }

    /// Expected and maximum Rand index under the same hypergeometric model,
    /// expressed on the RI scale.
    fn ri_bounds(&self) -> (f64, f64) {
        let pairs = comb2(self.n) as f64;
        let (a, b) = (self.predicted as f64, self.truth as f64);
        let expected_index = a * b / pairs;
        let max_index = (a + b) / 2.0;
        let to_ri = |index: f64| 1.0 + (2.0 * index - a - b) / pairs;
        (to_ri(expected_index), to_ri(max_index))
    }
}

fn align<'a>(predicted: &'a Labels, truth: &'a Labels) -> Result<(Vec<&'a str>, Vec<&'a str>), EvaluationError> {
    let p_keys: BTreeSet<&String> = predicted.keys().collect();
    let t_keys: BTreeSet<&String> = truth.keys().collect();
    if p_keys != t_keys {
        return Err(EvaluationError::TokenMismatch {
            only_predicted: p_keys.difference(&t_keys).map(|s| s.to_string()).collect(),
            only_truth: t_keys.difference(&p_keys).map(|s| s.to_string()).collect(),
        });
    }
    // Both maps iterate in the same key order.
    Ok((
        predicted.values().map(String::as_str).collect(),
        truth.values().map(String::as_str).collect(),
    ))
}

/// Pair counts from two label slices over the same items.
pub fn pair_counts_from_labels<P: Eq + Hash, T: Eq + Hash>(
    predicted: &[P],
    truth: &[T],
) -> Result<PairCounts, EvaluationError> {
    Ok(PairSums::from_labels(predicted, truth)?.counts())
}

/// Pair counts between two clusterings of the same token set.
pub fn pair_counts(predicted: &Labels, truth: &Labels) -> Result<PairCounts, EvaluationError> {
    let (p, t) = align(predicted, truth)?;
    pair_counts_from_labels(&p, &t)
}

/// `(TP + TN) / (TP + FP + FN + TN)`.
pub fn rand_index(counts: &PairCounts) -> Result<f64, EvaluationError> {
    let total = counts.total();
    if total == 0 {
        return Err(EvaluationError::TooFewTokens(total as usize));
    }
    Ok((counts.tp + counts.tn) as f64 / total as f64)
}

/// Adjusted Rand index from two label slices over the same items.
pub fn adjusted_rand_index_from_labels<P: Eq + Hash, T: Eq + Hash>(
    predicted: &[P],
    truth: &[T],
) -> Result<f64, EvaluationError> {
    if predicted.len() < 2 {
        return Err(EvaluationError::TooFewTokens(predicted.len()));
    }
    Ok(PairSums::from_labels(predicted, truth)?.adjusted_rand_index())
}

/// Adjusted Rand index between two clusterings of the same token set.
/// When the expected and maximum index coincide the value is 1 for
/// identical clusterings and 0 otherwise.
pub fn adjusted_rand_index(predicted: &Labels, truth: &Labels) -> Result<f64, EvaluationError> {
    let (p, t) = align(predicted, truth)?;
    adjusted_rand_index_from_labels(&p, &t)
}

/// Full report for two aligned clusterings.
pub fn compare(predicted: &Labels, truth: &Labels) -> Result<EvaluationReport, EvaluationError> {
    let (p, t) = align(predicted, truth)?;
    if p.len() < 2 {
        return Err(EvaluationError::TooFewTokens(p.len()));
    }
    let sums = PairSums::from_labels(&p, &t)?;
    let counts = sums.counts();
    let (expected_ri, max_ri) = sums.ri_bounds();
    Ok(EvaluationReport {
        counts,
        rand_index: rand_index(&counts)?,
        adjusted_rand_index: sums.adjusted_rand_index(),
        expected_ri,
        max_ri,
        exemplar_pairs: ExemplarPairCounts::default(),
    })
}

/// Scores a cluster book against truth labels. Unclustered tokens count as
/// predicted singletons. A token is looked up by its normalized form first
/// and then by its raw phrases; truth entries for tokens outside the book
/// are ignored.
pub fn evaluate(book: &ClusterBook, truth: &Labels) -> Result<EvaluationReport, EvaluationError> {
    let predicted = book.predicted_labels();
    let raws: HashMap<&str, &Vec<String>> = book
        .clusters
        .values()
        .flat_map(|c| c.raws.iter().map(|(m, r)| (m.as_str(), r)))
        .collect();

    let mut aligned_truth = Labels::new();
    let mut missing = Vec::new();
    for token in predicted.keys() {
        let label = truth.get(token).or_else(|| {
            raws.get(token.as_str())
                .and_then(|rs| rs.iter().find_map(|r| truth.get(r)))
        });
        match label {
            Some(l) => {
                aligned_truth.insert(token.clone(), l.clone());
            }
            None => missing.push(token.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(EvaluationError::MissingTruth(missing));
    }

    let mut report = compare(&predicted, &aligned_truth)?;
    for (member, exemplar) in book.member_pairs() {
        if member == exemplar {
            continue;
        }
        if aligned_truth[member] == aligned_truth[exemplar] {
            report.exemplar_pairs.matched += 1;
        } else {
            report.exemplar_pairs.unmatched += 1;
        }
    }
    Ok(report)
}
