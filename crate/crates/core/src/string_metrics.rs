//! String distance and similarity kernels.
//!
//! All functions operate on Unicode scalar values. Callers are expected to
//! normalize (lowercase, strip digits) before comparing; no collation is
//! applied here.

use thiserror::Error;

/// Invalid Winkler parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("prefix scale must lie in [0, 0.25], got {0}")]
    PrefixScale(f64),
    #[error("max prefix must be at least 1")]
    MaxPrefix,
    #[error("prefix scale {prefix_scale} times max prefix {max_prefix} exceeds 1")]
    BoostOverflow { prefix_scale: f64, max_prefix: usize },
}

/// Raw quantities behind a Jaro similarity value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JaroBreakdown {
    /// Characters matched within the search window.
    pub matches: usize,
    /// Half the number of matched characters that appear in a different order.
    pub transpositions: usize,
    pub len1: usize,
    pub len2: usize,
}

impl JaroBreakdown {
    /// Jaro similarity from the matched/transposed counts.
    pub fn similarity(&self) -> f64 {
        if self.matches == 0 {
            return 0.0;
        }
        let m = self.matches as f64;
        (m / self.len1 as f64 + m / self.len2 as f64 + (m - self.transpositions as f64) / m) / 3.0
    }
}

/// Prefix boost parameters for Jaro-Winkler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinklerParams {
    prefix_scale: f64,
    max_prefix: usize,
}

impl Default for WinklerParams {
    fn default() -> Self {
        Self {
            prefix_scale: 0.1,
            max_prefix: 4,
        }
    }
}

impl WinklerParams {
    pub fn new(prefix_scale: f64, max_prefix: usize) -> Result<Self, MetricsError> {
        if !(0.0..=0.25).contains(&prefix_scale) {
            return Err(MetricsError::PrefixScale(prefix_scale));
        }
        if max_prefix == 0 {
            return Err(MetricsError::MaxPrefix);
        }
        if prefix_scale * max_prefix as f64 > 1.0 {
            return Err(MetricsError::BoostOverflow {
                prefix_scale,
                max_prefix,
            });
        }
        Ok(Self {
            prefix_scale,
            max_prefix,
        })
    }

    pub fn prefix_scale(&self) -> f64 {
        self.prefix_scale
    }

    pub fn max_prefix(&self) -> usize {
        self.max_prefix
    }
}

/// Minimum number of single-character insertions, deletions and
/// substitutions turning `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    // Keep the row over the shorter string.
    let (long, short) = if a.len() >= b.len() { (&a, &b) } else { (&b, &a) };
    if short.is_empty() {
        return long.len();
    }

    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let substitution = prev[j] + usize::from(lc != sc);
            let deletion = prev[j + 1] + 1;
            let insertion = curr[j] + 1;
            curr[j + 1] = substitution.min(deletion).min(insertion);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Matched characters and transpositions between `a` and `b`, using the
/// window `floor(max(|a|, |b|) / 2) - 1` clamped at zero.
pub fn jaro_breakdown(a: &str, b: &str) -> JaroBreakdown {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (len1, len2) = (a.len(), b.len());
    if len1 == 0 || len2 == 0 {
        return JaroBreakdown {
            matches: 0,
            transpositions: 0,
            len1,
            len2,
        };
    }

    let window = (len1.max(len2) / 2).saturating_sub(1);
    let mut a_matched = vec![false; len1];
    let mut b_matched = vec![false; len2];
    let mut matches = 0;
    for (i, &ac) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(len2);
        for j in lo..hi {
            if !b_matched[j] && b[j] == ac {
                a_matched[i] = true;
                b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }

    let a_seq = a.iter().zip(&a_matched).filter(|(_, &m)| m).map(|(c, _)| c);
    let b_seq = b.iter().zip(&b_matched).filter(|(_, &m)| m).map(|(c, _)| c);
    let out_of_order = a_seq.zip(b_seq).filter(|(x, y)| x != y).count();

    JaroBreakdown {
        matches,
        transpositions: out_of_order / 2,
        len1,
        len2,
    }
}

/// Jaro similarity in `[0, 1]`.
///
/// Two empty strings are identical and score 1; one empty string scores 0.
pub fn jaro(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    jaro_breakdown(a, b).similarity()
}

fn common_prefix(a: &str, b: &str, cap: usize) -> usize {
    a.chars()
        .zip(b.chars())
        .take(cap)
        .take_while(|(x, y)| x == y)
        .count()
}

/// Jaro similarity boosted by the shared prefix: `j + l * p * (1 - j)`.
pub fn jaro_winkler(a: &str, b: &str, params: &WinklerParams) -> f64 {
    let sim_j = jaro(a, b);
    let prefix = common_prefix(a, b, params.max_prefix) as f64;
    let sim_w = sim_j + prefix * params.prefix_scale * (1.0 - sim_j);
    sim_w.min(1.0)
}
