//! End-to-end clustering: normalization, first-letter partitioning,
//! affinity propagation, Jaro-Winkler filtering and residual passes.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::affinity::{run_affinity_propagation, ApConfig, ApError, ExemplarAssignment};
use crate::string_metrics::{jaro_winkler, WinklerParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("no input phrases")]
    EmptyInput,
    #[error("every phrase normalized to nothing; nothing to cluster")]
    NothingToCluster,
    #[error("jaro-winkler threshold must lie in [0, 1], got {0}")]
    Threshold(f64),
    #[error("passes must be at least 1")]
    Passes,
    #[error(transparent)]
    Ap(#[from] ApError),
}

/// A distinct normalized clustering key and every raw phrase that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub normalized: String,
    pub raws: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub jw_threshold: f64,
    pub passes: usize,
    pub partition_by_first_letter: bool,
    pub stopwords: BTreeSet<String>,
    pub winkler: WinklerParams,
    pub ap: ApConfig,
    /// Cluster partitions on the rayon pool instead of one after another.
    pub parallel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            jw_threshold: 0.95,
            passes: 2,
            partition_by_first_letter: true,
            stopwords: BTreeSet::new(),
            winkler: WinklerParams::default(),
            ap: ApConfig::default(),
            parallel: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.jw_threshold) {
            return Err(PipelineError::Threshold(self.jw_threshold));
        }
        if self.passes == 0 {
            return Err(PipelineError::Passes);
        }
        self.ap.validate()?;
        Ok(())
    }
}

/// One accepted cluster in a [`ClusterBook`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BookCluster {
    /// Exemplar first, then the remaining members in lexicographic order.
    pub members: Vec<String>,
    /// Raw phrases behind each member.
    pub raws: BTreeMap<String, Vec<String>>,
}

/// Final exemplar -> members dictionary plus the tokens no pass accepted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterBook {
    pub clusters: BTreeMap<String, BookCluster>,
    /// Sorted.
    pub unclustered: Vec<String>,
}

impl ClusterBook {
    pub fn clustered_count(&self) -> usize {
        self.clusters.values().map(|c| c.members.len()).sum()
    }

    pub fn token_count(&self) -> usize {
        self.clustered_count() + self.unclustered.len()
    }

    /// `(member, exemplar)` for every member, exemplars included.
    pub fn member_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.clusters
            .iter()
            .flat_map(|(e, c)| c.members.iter().map(move |m| (m.as_str(), e.as_str())))
    }

    /// Token -> predicted label. Clustered tokens are labelled by their
    /// exemplar; each unclustered token gets a label of its own.
    pub fn predicted_labels(&self) -> BTreeMap<String, String> {
        let mut labels = BTreeMap::new();
        for (member, exemplar) in self.member_pairs() {
            labels.insert(member.to_string(), format!("c:{exemplar}"));
        }
        for token in &self.unclustered {
            labels.insert(token.clone(), format!("u:{token}"));
        }
        labels
    }
}

fn is_abbreviation(word: &str) -> bool {
    word.contains('.') && word.chars().count() <= 2
}

/// Lowercases, drops digit runs, abbreviations (a period in a word of at
/// most two characters, or a lone letter) and stopwords, and joins what is
/// left with single spaces. `None` when nothing survives.
pub fn normalize(phrase: &str, stopwords: &BTreeSet<String>) -> Option<String> {
    let lowered = phrase.to_lowercase();
    let words: Vec<String> = lowered
        .split_whitespace()
        .filter(|w| !is_abbreviation(w))
        .map(|w| {
            let stripped: String = w.chars().filter(|c| !c.is_numeric()).collect();
            stripped
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_string()
        })
        .filter(|w| w.chars().count() > 1 && !stopwords.contains(w))
        .collect();
    if words.is_empty() {
        None
    } else {
        Some(words.join(" "))
    }
}

/// Normalizes and deduplicates phrases. Tokens come back sorted by
/// normalized form with ids assigned in that order, so the result does not
/// depend on input order.
pub fn prepare_tokens<S: AsRef<str>>(phrases: &[S], stopwords: &BTreeSet<String>) -> Vec<Token> {
    let mut by_key: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for phrase in phrases {
        let raw = phrase.as_ref();
        if let Some(key) = normalize(raw, stopwords) {
            by_key.entry(key).or_default().insert(raw.to_string());
        }
    }
    by_key
        .into_iter()
        .enumerate()
        .map(|(id, (normalized, raws))| Token {
            id,
            normalized,
            raws: raws.into_iter().collect(),
        })
        .collect()
}

/// Partition key: one of the 26 ASCII letters, or the overflow bucket for
/// any other first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    Letter(char),
    Overflow,
}

impl GroupKey {
    pub fn of(normalized: &str) -> Self {
        match normalized.chars().next() {
            Some(c) if c.is_ascii_lowercase() => GroupKey::Letter(c),
            Some(c) if c.is_ascii_uppercase() => GroupKey::Letter(c.to_ascii_lowercase()),
            _ => GroupKey::Overflow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenGroup {
    pub key: GroupKey,
    pub tokens: Vec<Token>,
}

/// Groups tokens by the first Unicode scalar of their normalized form,
/// ordered `a..z` then overflow. Token order inside a group is preserved.
pub fn partition(tokens: &[Token]) -> Vec<TokenGroup> {
    let mut groups: BTreeMap<GroupKey, Vec<Token>> = BTreeMap::new();
    for t in tokens {
        groups.entry(GroupKey::of(&t.normalized)).or_default().push(t.clone());
    }
    groups
        .into_iter()
        .map(|(key, tokens)| TokenGroup { key, tokens })
        .collect()
}

/// Result of thresholding one AP assignment. Indices refer to the slice
/// handed to [`threshold_filter`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilterOutcome {
    /// `(exemplar, members)`; members include the exemplar.
    pub clusters: Vec<(usize, Vec<usize>)>,
    pub rejected: Vec<usize>,
}

/// Keeps a member iff its Jaro-Winkler similarity to the cluster exemplar
/// is at least `threshold`. Exemplars always stay, so a cluster can shrink
/// to a singleton but never disappears.
pub fn threshold_filter<S: AsRef<str>>(
    assignment: &ExemplarAssignment,
    tokens: &[S],
    params: &WinklerParams,
    threshold: f64,
) -> FilterOutcome {
    assert_eq!(
        assignment.exemplar_of.len(),
        tokens.len(),
        "assignment does not cover the token group"
    );
    let mut outcome = FilterOutcome::default();
    for (exemplar, members) in assignment.clusters() {
        let e = tokens[exemplar].as_ref();
        let mut kept = Vec::with_capacity(members.len());
        for m in members {
            if m == exemplar || jaro_winkler(tokens[m].as_ref(), e, params) >= threshold {
                kept.push(m);
            } else {
                outcome.rejected.push(m);
            }
        }
        outcome.clusters.push((exemplar, kept));
    }
    outcome.rejected.sort_unstable();
    outcome
}

#[derive(Debug, Default)]
struct GroupOutcome {
    /// `(exemplar, members)` as token references into the group.
    clusters: Vec<(usize, Vec<usize>)>,
    unclustered: Vec<usize>,
}

fn cluster_group(tokens: &[Token], config: &PipelineConfig) -> Result<GroupOutcome, PipelineError> {
    let mut outcome = GroupOutcome::default();
    let mut pending: Vec<usize> = (0..tokens.len()).collect();
    for _ in 0..config.passes {
        match pending.len() {
            0 => break,
            1 => {
                outcome.clusters.push((pending[0], vec![pending[0]]));
                pending.clear();
                break;
            }
            _ => {}
        }
        let keys: Vec<&str> = pending.iter().map(|&i| tokens[i].normalized.as_str()).collect();
        let assignment = run_affinity_propagation(&keys, &config.ap)?;
        let filtered = threshold_filter(&assignment, &keys, &config.winkler, config.jw_threshold);
        for (exemplar, members) in filtered.clusters {
            let members = members.into_iter().map(|m| pending[m]).collect();
            outcome.clusters.push((pending[exemplar], members));
        }
        pending = filtered.rejected.into_iter().map(|r| pending[r]).collect();
    }
    outcome.unclustered = pending;
    Ok(outcome)
}

fn merge_into(book: &mut ClusterBook, tokens: &[Token], outcome: GroupOutcome) {
    for (exemplar, members) in outcome.clusters {
        let exemplar = &tokens[exemplar];
        let mut others: Vec<&Token> = members
            .iter()
            .map(|&m| &tokens[m])
            .filter(|t| t.id != exemplar.id)
            .collect();
        others.sort_by(|a, b| a.normalized.cmp(&b.normalized));

        let mut cluster = BookCluster::default();
        for t in std::iter::once(exemplar).chain(others) {
            cluster.members.push(t.normalized.clone());
            cluster.raws.insert(t.normalized.clone(), t.raws.clone());
        }
        book.clusters.insert(exemplar.normalized.clone(), cluster);
    }
    book.unclustered
        .extend(outcome.unclustered.into_iter().map(|i| tokens[i].normalized.clone()));
}

/// Runs the full procedure on raw phrases.
///
/// Each partition is clustered with affinity propagation and filtered
/// against the threshold; rejected tokens are clustered again for up to
/// `passes - 1` further rounds within their partition. A partition (or
/// residue) of one token becomes a singleton cluster without running AP.
/// Whatever the last pass rejects is reported as unclustered.
pub fn run_pipeline<S: AsRef<str>>(
    phrases: &[S],
    config: &PipelineConfig,
) -> Result<ClusterBook, PipelineError> {
    config.validate()?;
    if phrases.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    let tokens = prepare_tokens(phrases, &config.stopwords);
    if tokens.is_empty() {
        return Err(PipelineError::NothingToCluster);
    }

    let groups: Vec<Vec<Token>> = if config.partition_by_first_letter {
        partition(&tokens).into_iter().map(|g| g.tokens).collect()
    } else {
        vec![tokens]
    };

    let outcomes: Vec<GroupOutcome> = if config.parallel {
        groups
            .par_iter()
            .map(|g| cluster_group(g, config))
            .collect::<Result<_, _>>()?
    } else {
        groups
            .iter()
            .map(|g| cluster_group(g, config))
            .collect::<Result<_, _>>()?
    };

    let mut book = ClusterBook::default();
    for (group, outcome) in groups.iter().zip(outcomes) {
        merge_into(&mut book, group, outcome);
    }
    book.unclustered.sort();
    Ok(book)
}
