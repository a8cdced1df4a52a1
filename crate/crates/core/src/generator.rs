//! Seeded synthetic corpus of spelling variants with ground-truth labels.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evaluation::Labels;

const PLACE_NAMES: &str = include_str!("../data/place_names.txt");
const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
const ATTEMPTS_PER_VARIANT: usize = 50;

/// Bundled base names, in file order.
pub fn base_names() -> Vec<&'static str> {
    PLACE_NAMES
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("base_count must be between 1 and {available}, got {requested}")]
    BaseCount { requested: usize, available: usize },
    #[error("variant range {min}..={max} is empty")]
    VariantRange { min: usize, max: usize },
    #[error("edit weights must be finite, non-negative and not all zero")]
    Weights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Substitute,
    Delete,
    Insert,
    Transpose,
}

const OPS: [EditOp; 4] = [EditOp::Substitute, EditOp::Delete, EditOp::Insert, EditOp::Transpose];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditWeights {
    pub substitute: f64,
    pub delete: f64,
    pub insert: f64,
    pub transpose: f64,
}

impl Default for EditWeights {
    fn default() -> Self {
        Self {
            substitute: 1.0,
            delete: 1.0,
            insert: 1.0,
            transpose: 1.0,
        }
    }
}

impl EditWeights {
    fn as_array(&self) -> [f64; 4] {
        [self.substitute, self.delete, self.insert, self.transpose]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub base_count: usize,
    pub variants_per_base: RangeInclusive<usize>,
    pub edit_weights: EditWeights,
    /// Never edit the first character.
    pub preserve_first_letter: bool,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            base_count: 200,
            variants_per_base: 2..=5,
            edit_weights: EditWeights::default(),
            preserve_first_letter: true,
            seed: 42,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let available = base_names().len();
        if self.base_count == 0 || self.base_count > available {
            return Err(GeneratorError::BaseCount {
                requested: self.base_count,
                available,
            });
        }
        if self.variants_per_base.is_empty() {
            return Err(GeneratorError::VariantRange {
                min: *self.variants_per_base.start(),
                max: *self.variants_per_base.end(),
            });
        }
        let w = self.edit_weights.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().all(|x| *x == 0.0) {
            return Err(GeneratorError::Weights);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedCorpus {
    /// Bases and variants, shuffled.
    pub phrases: Vec<String>,
    /// Every emitted token mapped to the base name it came from.
    pub truth: Labels,
}

fn apply_edit<R: Rng>(word: &mut Vec<char>, op: EditOp, lo: usize, rng: &mut R) {
    let random_letter = |rng: &mut R| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char;
    let len = word.len();
    match op {
        EditOp::Substitute if len > lo => {
            let pos = rng.gen_range(lo..len);
            let old = word[pos];
            let mut c = random_letter(rng);
            while c == old {
                c = random_letter(rng);
            }
            word[pos] = c;
        }
        EditOp::Delete if len > lo + 1 => {
            word.remove(rng.gen_range(lo..len));
        }
        EditOp::Insert => {
            let pos = rng.gen_range(lo.min(len)..=len);
            word.insert(pos, random_letter(rng));
        }
        EditOp::Transpose if len >= lo + 2 => {
            let pos = rng.gen_range(lo..len - 1);
            word.swap(pos, pos + 1);
        }
        _ => {}
    }
}

/// Picks `base_count` bundled names and derives variants from each with one
/// or two weighted edits. Variants are distinct from every other emitted
/// token; a base that cannot yield enough distinct variants within a fixed
/// number of attempts gets fewer.
pub fn generate_corpus(spec: &GeneratorSpec) -> Result<GeneratedCorpus, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ops = WeightedIndex::new(spec.edit_weights.as_array()).map_err(|_| GeneratorError::Weights)?;
    let lo = usize::from(spec.preserve_first_letter);

    let names = base_names();
    let bases: Vec<&str> = names.choose_multiple(&mut rng, spec.base_count).copied().collect();
    let mut emitted: BTreeSet<String> = bases.iter().map(|b| b.to_string()).collect();
    let mut truth = Labels::new();
    let mut phrases = Vec::new();

    for base in &bases {
        truth.insert(base.to_string(), base.to_string());
        phrases.push(base.to_string());
        let wanted = rng.gen_range(spec.variants_per_base.clone());
        let mut made = 0;
        for _ in 0..wanted * ATTEMPTS_PER_VARIANT {
            if made == wanted {
                break;
            }
            let mut word: Vec<char> = base.chars().collect();
            for _ in 0..rng.gen_range(1..=2) {
                apply_edit(&mut word, OPS[ops.sample(&mut rng)], lo, &mut rng);
            }
            let variant: String = word.into_iter().collect();
            if emitted.insert(variant.clone()) {
                truth.insert(variant.clone(), base.to_string());
                phrases.push(variant);
                made += 1;
            }
        }
    }
    phrases.shuffle(&mut rng);
    Ok(GeneratedCorpus { phrases, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_is_distinct() {
        let names = base_names();
        let set: BTreeSet<_> = names.iter().collect();
        assert_eq!(set.len(), names.len());
        assert!(names.len() >= 200);
        assert!(names.iter().all(|n| n.chars().all(|c| c.is_ascii_lowercase())));
    }

    #[test]
    fn zero_variants_gives_bases_only() {
        let spec = GeneratorSpec {
            base_count: 30,
            variants_per_base: 0..=0,
            ..GeneratorSpec::default()
        };
        let corpus = generate_corpus(&spec).unwrap();
        assert_eq!(corpus.phrases.len(), 30);
        let labels: BTreeSet<_> = corpus.truth.values().collect();
        assert_eq!(labels.len(), 30);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let spec = GeneratorSpec::default();
        assert_eq!(generate_corpus(&spec).unwrap(), generate_corpus(&spec).unwrap());
        let other = GeneratorSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate_corpus(&spec).unwrap(), generate_corpus(&other).unwrap());
    }

    #[test]
    fn variants_keep_first_letter() {
        let corpus = generate_corpus(&GeneratorSpec::default()).unwrap();
        for (token, base) in &corpus.truth {
            assert_eq!(token.chars().next(), base.chars().next(), "{token} from {base}");
        }
    }

    #[test]
    fn variant_counts_and_uniqueness() {
        let corpus = generate_corpus(&GeneratorSpec::default()).unwrap();
        let unique: BTreeSet<_> = corpus.phrases.iter().collect();
        assert_eq!(unique.len(), corpus.phrases.len());
        assert_eq!(corpus.truth.len(), corpus.phrases.len());
        let mut per_base = std::collections::BTreeMap::<&String, usize>::new();
        for base in corpus.truth.values() {
            *per_base.entry(base).or_default() += 1;
        }
        assert_eq!(per_base.len(), 200);
        assert!(per_base.values().all(|&c| (3..=6).contains(&c)));
    }

    #[test]
    fn single_edit_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for op in OPS {
            for _ in 0..20 {
                let mut w: Vec<char> = "saket".chars().collect();
                apply_edit(&mut w, op, 1, &mut rng);
                assert_eq!(w[0], 's');
                let s: String = w.iter().collect();
                let d = crate::string_metrics::levenshtein("saket", &s);
                match op {
                    EditOp::Transpose => assert!(d <= 2),
                    _ => assert_eq!(d, 1, "{op:?} {s}"),
                }
            }
        }
    }

    #[test]
    fn validation() {
        let bad = GeneratorSpec { base_count: 0, ..GeneratorSpec::default() };
        assert!(matches!(bad.validate(), Err(GeneratorError::BaseCount { .. })));
        let bad = GeneratorSpec { base_count: 10_000, ..GeneratorSpec::default() };
        assert!(matches!(bad.validate(), Err(GeneratorError::BaseCount { .. })));
        #[allow(clippy::reversed_empty_ranges)]
        let bad = GeneratorSpec { variants_per_base: 3..=2, ..GeneratorSpec::default() };
        assert!(matches!(bad.validate(), Err(GeneratorError::VariantRange { .. })));
        let zero = EditWeights { substitute: 0.0, delete: 0.0, insert: 0.0, transpose: 0.0 };
        let bad = GeneratorSpec { edit_weights: zero, ..GeneratorSpec::default() };
        assert_eq!(bad.validate(), Err(GeneratorError::Weights));
        let neg = EditWeights { substitute: -1.0, ..EditWeights::default() };
        let bad = GeneratorSpec { edit_weights: neg, ..GeneratorSpec::default() };
        assert_eq!(bad.validate(), Err(GeneratorError::Weights));
    }
}
