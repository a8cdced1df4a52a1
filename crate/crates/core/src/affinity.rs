//! Affinity propagation over string-distance similarities.
//!
//! Similarities are negative Levenshtein distances and every diagonal entry
//! (the preference) is set to the smallest off-diagonal similarity, so no
//! token is favoured as an exemplar a priori. Responsibilities and
//! availabilities start at zero and are damped as
//! `new = damping * old + (1 - damping) * computed`.
//!
//! Row updates run in parallel, but every floating-point sum has a fixed
//! order, so results do not depend on the thread schedule.

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::string_metrics::levenshtein;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApError {
    #[error("cannot cluster an empty token list")]
    EmptyInput,
    #[error("similarity matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("damping must lie in [0.5, 1), got {0}")]
    Damping(f64),
    #[error("max_iterations must be positive")]
    MaxIterations,
    #[error("stability_window must be positive and below max_iterations ({max_iterations}), got {window}")]
    StabilityWindow { window: usize, max_iterations: usize },
    #[error("distance exponent must be positive")]
    DistanceExponent,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApConfig {
    pub damping: f64,
    pub max_iterations: usize,
    /// Consecutive iterations with an unchanged assignment that count as
    /// convergence.
    pub stability_window: usize,
    /// Power applied to the Levenshtein distance before negation.
    pub distance_exponent: u32,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            damping: 0.65,
            max_iterations: 200,
            stability_window: 15,
            distance_exponent: 1,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<(), ApError> {
        if !(0.5..1.0).contains(&self.damping) {
            return Err(ApError::Damping(self.damping));
        }
        if self.max_iterations == 0 {
            return Err(ApError::MaxIterations);
        }
        if self.stability_window == 0 || self.stability_window >= self.max_iterations {
            return Err(ApError::StabilityWindow {
                window: self.stability_window,
                max_iterations: self.max_iterations,
            });
        }
        if self.distance_exponent == 0 {
            return Err(ApError::DistanceExponent);
        }
        Ok(())
    }
}

/// Dense `n x n` similarity matrix with the preference on its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Array2<f64>,
    preference: f64,
}

impl SimilarityMatrix {
    /// Wraps an arbitrary square matrix. The diagonal is used as given;
    /// `preference()` reports the first diagonal entry.
    pub fn from_dense(values: Array2<f64>) -> Result<Self, ApError> {
        let (rows, cols) = values.dim();
        if rows == 0 || rows != cols {
            return Err(ApError::NotSquare { rows, cols });
        }
        let preference = values[[0, 0]];
        Ok(Self { values, preference })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn preference(&self) -> f64 {
        self.preference
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[[i, k]]
    }

    /// Copy with a tiny fixed-seed perturbation subtracted from every
    /// off-diagonal entry. Integer distances produce exact ties between
    /// symmetric candidates, and exact ties keep message passing from
    /// settling on either one. The amplitude is far below the unit gap
    /// between distinct distances, so it cannot reorder solutions whose net
    /// similarities differ; a tie between joining a cluster and founding one
    /// resolves toward founding one.
    pub fn perturbed(&self) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(TIE_BREAK_SEED);
        let mut values = self.values.clone();
        for ((i, k), v) in values.indexed_iter_mut() {
            let u: f64 = rng.gen();
            if i != k {
                *v -= TIE_BREAK_AMPLITUDE * u;
            }
        }
        Self {
            values,
            preference: self.preference,
        }
    }
}

const TIE_BREAK_SEED: u64 = 0x5eed_a11f;
const TIE_BREAK_AMPLITUDE: f64 = 1e-7;

/// Builds `s(i, j) = -levenshtein(i, j)^exponent` with the minimum
/// off-diagonal value written on the diagonal. A single token gets a zero
/// preference.
pub fn build_similarity_matrix<S: AsRef<str> + Sync>(
    tokens: &[S],
    distance_exponent: u32,
) -> Result<SimilarityMatrix, ApError> {
    let n = tokens.len();
    if n == 0 {
        return Err(ApError::EmptyInput);
    }
    if distance_exponent == 0 {
        return Err(ApError::DistanceExponent);
    }

    let mut values = Array2::<f64>::zeros((n, n));
    values
        .outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j {
                    let d = levenshtein(tokens[i].as_ref(), tokens[j].as_ref()) as f64;
                    *cell = -d.powi(distance_exponent as i32);
                }
            }
        });

    let preference = if n == 1 {
        0.0
    } else {
        values
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min)
    };
    values.diag_mut().fill(preference);
    Ok(SimilarityMatrix { values, preference })
}

/// Responsibility, availability and criterion matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub r: Array2<f64>,
    pub a: Array2<f64>,
    pub c: Array2<f64>,
    pub iteration: usize,
}

impl MessageState {
    pub fn zeros(n: usize) -> Self {
        Self {
            r: Array2::zeros((n, n)),
            a: Array2::zeros((n, n)),
            c: Array2::zeros((n, n)),
            iteration: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.r.nrows()
    }

    /// `r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))`, damped. The
    /// diagonal uses the same rule. With a single column the competing term
    /// is taken as zero.
    pub fn update_responsibility(&mut self, sim: &SimilarityMatrix, damping: f64) {
        assert_eq!(self.n(), sim.n(), "state and similarity sizes differ");
        Zip::from(self.r.rows_mut())
            .and(self.a.rows())
            .and(sim.values.rows())
            .par_for_each(|mut r_row, a_row, s_row| {
                // Best and second-best of a + s over the row.
                let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                let mut best_idx = usize::MAX;
                for (k, (&a, &s)) in a_row.iter().zip(s_row.iter()).enumerate() {
                    let v = a + s;
                    if v > best {
                        second = best;
                        best = v;
                        best_idx = k;
                    } else if v > second {
                        second = v;
                    }
                }
                for (k, r) in r_row.iter_mut().enumerate() {
                    let competitor = if k == best_idx { second } else { best };
                    let competitor = if competitor.is_finite() { competitor } else { 0.0 };
                    let computed = s_row[k] - competitor;
                    *r = damping * *r + (1.0 - damping) * computed;
                }
            });
    }

    /// Off-diagonal `a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))`,
    /// diagonal `a(k,k) <- sum_{i' != k} max(0, r(i',k))`, both damped.
    pub fn update_availability(&mut self, damping: f64) {
        let r = &self.r;
        Zip::indexed(self.a.columns_mut())
            .and(r.columns())
            .par_for_each(|k, mut a_col, r_col| {
                let positive_sum: f64 = r_col
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, &v)| v.max(0.0))
                    .sum();
                let self_r = r_col[k];
                for (i, a) in a_col.iter_mut().enumerate() {
                    let computed = if i == k {
                        positive_sum
                    } else {
                        (self_r + positive_sum - r_col[i].max(0.0)).min(0.0)
                    };
                    *a = damping * *a + (1.0 - damping) * computed;
                }
            });
    }

    /// `c = r + a`.
    pub fn update_criterion(&mut self) {
        Zip::from(&mut self.c)
            .and(&self.r)
            .and(&self.a)
            .par_for_each(|c, &r, &a| *c = r + a);
    }

    /// One full round: responsibilities, availabilities, criterion.
    pub fn step(&mut self, sim: &SimilarityMatrix, damping: f64) {
        self.update_responsibility(sim, damping);
        self.update_availability(damping);
        self.update_criterion();
        self.iteration += 1;
    }
}

/// Exemplar index for every point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExemplarAssignment {
    pub exemplar_of: Vec<usize>,
    pub converged: bool,
    pub iterations_run: usize,
}

impl ExemplarAssignment {
    /// Distinct exemplars in ascending order.
    pub fn exemplars(&self) -> Vec<usize> {
        self.exemplar_of
            .iter()
            .enumerate()
            .filter(|&(i, &e)| i == e)
            .map(|(i, _)| i)
            .collect()
    }

    /// Members of each cluster keyed by exemplar, in ascending order.
    pub fn clusters(&self) -> Vec<(usize, Vec<usize>)> {
        self.exemplars()
            .into_iter()
            .map(|e| {
                let members = (0..self.exemplar_of.len())
                    .filter(|&i| self.exemplar_of[i] == e)
                    .collect();
                (e, members)
            })
            .collect()
    }
}

fn argmax_lowest(row: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Row-wise argmax of the criterion matrix, lowest index on ties.
fn raw_exemplars(state: &MessageState) -> Vec<usize> {
    state.c.rows().into_iter().map(argmax_lowest).collect()
}

/// A point whose chosen exemplar did not elect itself moves to the most
/// similar self-electing exemplar, or becomes a singleton if there is none.
fn repair(raw: &[usize], sim: &SimilarityMatrix) -> Vec<usize> {
    let self_electing: Vec<usize> = (0..raw.len()).filter(|&k| raw[k] == k).collect();
    raw.iter()
        .enumerate()
        .map(|(i, &k)| {
            if raw[k] == k {
                return k;
            }
            let mut nearest: Option<usize> = None;
            for &e in &self_electing {
                if nearest.is_none_or(|b| sim.get(i, e) > sim.get(i, b)) {
                    nearest = Some(e);
                }
            }
            nearest.unwrap_or(i)
        })
        .collect()
}

/// Row-wise argmax of the criterion matrix (lowest index on ties), followed
/// by the self-consistency repair.
pub fn extract_exemplars(state: &MessageState, sim: &SimilarityMatrix) -> ExemplarAssignment {
    ExemplarAssignment {
        exemplar_of: repair(&raw_exemplars(state), sim),
        converged: false,
        iterations_run: state.iteration,
    }
}

/// Iterates message passing on a prepared matrix until the assignment has
/// been stable for `stability_window` iterations or `max_iterations` is hit.
///
/// Iterations whose raw argmax needs repair do not count toward stability:
/// while symmetric candidates are still undecided each of them points at
/// the other, and that transient would otherwise pass for convergence.
pub fn run_on_matrix(sim: &SimilarityMatrix, config: &ApConfig) -> Result<ExemplarAssignment, ApError> {
    config.validate()?;
    let n = sim.n();
    if n == 1 {
        return Ok(ExemplarAssignment {
            exemplar_of: vec![0],
            converged: true,
            iterations_run: 0,
        });
    }

    let working = sim.perturbed();
    let mut state = MessageState::zeros(n);
    let mut current: Vec<usize> = (0..n).collect();
    let mut stable = 0;
    while state.iteration < config.max_iterations {
        state.step(&working, config.damping);
        let raw = raw_exemplars(&state);
        let next = repair(&raw, sim);
        let consistent = next == raw;
        if consistent && next == current {
            stable += 1;
        } else {
            stable = usize::from(consistent);
        }
        current = next;
        if stable >= config.stability_window {
            return Ok(ExemplarAssignment {
                exemplar_of: current,
                converged: true,
                iterations_run: state.iteration,
            });
        }
    }
    Ok(ExemplarAssignment {
        exemplar_of: current,
        converged: false,
        iterations_run: state.iteration,
    })
}

/// Builds the similarity matrix for `tokens` and clusters it.
pub fn run_affinity_propagation<S: AsRef<str> + Sync>(
    tokens: &[S],
    config: &ApConfig,
) -> Result<ExemplarAssignment, ApError> {
    config.validate()?;
    let sim = build_similarity_matrix(tokens, config.distance_exponent)?;
    run_on_matrix(&sim, config)
}
