//! Finitely supported step measures on `F_k` and the random walks they drive.
//!
//! Weights are exact rationals. Sampling draws an integer below the common
//! denominator whenever it fits in 64 bits, so a walk consumes exactly one
//! 64-bit draw per step and is reproducible bit for bit.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::freegroup::{FreeGroup, FreeGroupError, Word};
use crate::rng::{self, TrialRng};
use crate::stallings::{Index, SubgroupAutomaton};
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("a step measure needs a nonempty support")]
    EmptySupport,
    #[error("the identity is only allowed in the support through the holding probability")]
    IdentityInSupport,
    #[error("weight of {0} is not positive")]
    NonPositiveWeight(String),
    #[error("weights sum to {0}, not 1")]
    NotNormalized(String),
    #[error("holding probability must lie in [0, 1), got {0}")]
    BadHolding(String),
    #[error("convolution of {steps} steps over a support of {support} exceeds the cap ({max_steps} steps, support {max_support})")]
    CapExceeded { steps: usize, support: usize, max_steps: usize, max_support: usize },
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("measure is not permissible: {0}")]
    NotPermissible(String),
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

/// A probability measure on `F_k` with finite support and rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMeasure {
    rank: usize,
    support: BTreeMap<Word, BigRational>,
    sampler: Sampler,
}

#[derive(Clone, Debug, PartialEq)]
enum Sampler {
    /// Cumulative integer thresholds over a common denominator.
    Exact { denominator: u64, thresholds: Vec<u64>, words: Vec<Word> },
    Float { thresholds: Vec<f64>, words: Vec<Word> },
}

impl Sampler {
    fn build(support: &BTreeMap<Word, BigRational>) -> Sampler {
        let words: Vec<Word> = support.keys().cloned().collect();
        let lcm = support.values().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        if let Some(denominator) = lcm.to_u64() {
            let mut acc = 0u64;
            let thresholds = support
                .values()
                .map(|q| {
                    acc += (q.numer() * (&lcm / q.denom())).to_u64().expect("bounded by the denominator");
                    acc
                })
                .collect();
            return Sampler::Exact { denominator, thresholds, words };
        }
        let mut acc = 0.0;
        let thresholds = support
            .values()
            .map(|q| {
                acc += q.to_f64().unwrap_or(0.0);
                acc
            })
            .collect();
        Sampler::Float { thresholds, words }
    }

    #[inline]
    fn draw<'a>(&'a self, rng: &mut TrialRng) -> &'a Word {
        match self {
            Sampler::Exact { denominator, thresholds, words } => {
                let x = rng.random_range(0..*denominator);
                let i = thresholds.partition_point(|&t| t <= x);
                &words[i]
            }
            Sampler::Float { thresholds, words } => {
                let x: f64 = rng.random::<f64>() * thresholds.last().copied().unwrap_or(1.0);
                let i = thresholds.partition_point(|&t| t <= x).min(words.len() - 1);
                &words[i]
            }
        }
    }
}

impl StepMeasure {
    /// Builds a measure from explicit weights, which must be positive and sum
    /// to exactly 1. Repeated words have their weights added.
    pub fn from_weights(group: &FreeGroup, weights: Vec<(Word, BigRational)>) -> Result<StepMeasure, WalkError> {
        if weights.is_empty() {
            return Err(WalkError::EmptySupport);
        }
        let mut support: BTreeMap<Word, BigRational> = BTreeMap::new();
        for (w, q) in weights {
            group.check(&w)?;
            if !q.is_positive() {
                return Err(WalkError::NonPositiveWeight(w.to_string()));
            }
            *support.entry(w).or_insert_with(BigRational::zero) += q;
        }
        let total: BigRational = support.values().sum();
        if !total.is_one() {
            return Err(WalkError::NotNormalized(total.to_string()));
        }
        let sampler = Sampler::build(&support);
        Ok(StepMeasure { rank: group.rank(), support, sampler })
    }

    /// Equal weights on `set` (duplicates ignored). The identity is rejected.
    pub fn uniform_on(group: &FreeGroup, set: &[Word]) -> Result<StepMeasure, WalkError> {
        StepMeasure::lazy_uniform_on(group, set, BigRational::zero())
    }

    /// Holds with probability `hold` and otherwise steps uniformly in `set`.
    pub fn lazy_uniform_on(group: &FreeGroup, set: &[Word], hold: BigRational) -> Result<StepMeasure, WalkError> {
        if set.is_empty() {
            return Err(WalkError::EmptySupport);
        }
        if set.iter().any(Word::is_identity) {
            return Err(WalkError::IdentityInSupport);
        }
        if hold.is_negative() || hold >= BigRational::one() {
            return Err(WalkError::BadHolding(hold.to_string()));
        }
        let mut distinct = set.to_vec();
        distinct.sort();
        distinct.dedup();
        let each = (BigRational::one() - &hold) / BigRational::from_integer(BigInt::from(distinct.len()));
        let mut weights: Vec<(Word, BigRational)> = distinct.into_iter().map(|w| (w, each.clone())).collect();
        if hold.is_positive() {
            weights.push((Word::identity(), hold));
        }
        StepMeasure::from_weights(group, weights)
    }

    /// The uniform measure on the standard generators and their inverses.
    pub fn simple(group: &FreeGroup) -> StepMeasure {
        let letters: Vec<Word> = group.letters().map(Word::letter).collect();
        StepMeasure::uniform_on(group, &letters).expect("generators are nontrivial")
    }

    pub fn point_mass(group: &FreeGroup, w: Word) -> Result<StepMeasure, WalkError> {
        StepMeasure::from_weights(group, vec![(w, BigRational::one())])
    }

    pub fn group(&self) -> FreeGroup {
        FreeGroup::new(self.rank).expect("rank validated at construction")
    }

    pub fn support(&self) -> &BTreeMap<Word, BigRational> {
        &self.support
    }

    pub fn weight(&self, w: &Word) -> BigRational {
        self.support.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Longest word in the support.
    pub fn max_step_length(&self) -> usize {
        self.support.keys().map(Word::len).max().unwrap_or(0)
    }

    /// One step drawn from `rng`.
    #[inline]
    pub fn draw<'a>(&'a self, rng: &mut TrialRng) -> &'a Word {
        self.sampler.draw(rng)
    }
}

/// Flags of the permissibility check. In a free group the maximal finite
/// normal subgroup is trivial, so that condition is recorded as holding
/// rather than tested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermissibilityReport {
    pub finite: bool,
    pub symmetric: bool,
    pub generating: bool,
    pub non_elementary: bool,
    pub finite_radical_trivial: bool,
    /// Rank and index of the subgroup generated by the support.
    pub support_rank: usize,
    pub support_index: Index,
}

impl PermissibilityReport {
    pub fn passes(&self) -> bool {
        self.finite && self.symmetric && self.generating && self.non_elementary && self.finite_radical_trivial
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (ok, name) in [
            (self.finite, "finite"),
            (self.symmetric, "symmetric"),
            (self.generating, "generating"),
            (self.non_elementary, "non-elementary"),
            (self.finite_radical_trivial, "finite radical"),
        ] {
            if !ok {
                out.push(name);
            }
        }
        out
    }
}

pub fn validate_permissible(mu: &StepMeasure) -> PermissibilityReport {
    let group = mu.group();
    let symmetric = mu.support.iter().all(|(w, q)| mu.support.get(&w.inverse()) == Some(q));
    let gens: Vec<Word> = mu.support.keys().cloned().collect();
    let h = SubgroupAutomaton::from_generators(&group, &gens).expect("support words are checked");
    PermissibilityReport {
        finite: true,
        symmetric,
        generating: h.index() == Index::Finite(1),
        non_elementary: h.rank() >= 2,
        finite_radical_trivial: true,
        support_rank: h.rank(),
        support_index: h.index(),
    }
}

/// Bounds on exact convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvolutionCap {
    pub max_steps: usize,
    pub max_support: usize,
}

impl Default for ConvolutionCap {
    fn default() -> Self {
        ConvolutionCap { max_steps: 8, max_support: 8 }
    }
}

/// The exact law of `w_n`, the `n`-fold convolution of `μ`.
pub fn convolve(mu: &StepMeasure, n: usize, cap: ConvolutionCap) -> Result<BTreeMap<Word, BigRational>, WalkError> {
    if n > cap.max_steps || mu.support.len() > cap.max_support {
        return Err(WalkError::CapExceeded {
            steps: n,
            support: mu.support.len(),
            max_steps: cap.max_steps,
            max_support: cap.max_support,
        });
    }
    let mut law = BTreeMap::from([(Word::identity(), BigRational::one())]);
    for _ in 0..n {
        let mut next: BTreeMap<Word, BigRational> = BTreeMap::new();
        for (w, p) in &law {
            for (g, q) in &mu.support {
                *next.entry(w.mul(g)).or_insert_with(BigRational::zero) += p * q;
            }
        }
        law = next;
    }
    Ok(law)
}

/// A sampled walk `w_i = g_1⋯g_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub increments: Vec<Word>,
    pub endpoint: Word,
    pub seed: u64,
}

impl Trajectory {
    /// `w_0 = 1, w_1, …, w_n`.
    pub fn positions(&self) -> Vec<Word> {
        let mut current = Word::identity();
        let mut out = vec![current.clone()];
        for g in &self.increments {
            current.right_multiply(g);
            out.push(current.clone());
        }
        out
    }
}

/// The walk of length `n` for stream `seed`.
pub fn sample_walk(mu: &StepMeasure, n: usize, seed: u64) -> Trajectory {
    let mut r = rng::substream(seed, 0);
    let increments: Vec<Word> = (0..n).map(|_| mu.draw(&mut r).clone()).collect();
    let mut endpoint = Word::identity();
    for g in &increments {
        endpoint.right_multiply(g);
    }
    Trajectory { increments, endpoint, seed }
}

/// `w_n` drawn from an existing stream.
pub fn walk_endpoint(mu: &StepMeasure, n: usize, rng: &mut TrialRng) -> Word {
    let mut w = Word::identity();
    for _ in 0..n {
        w.right_multiply(mu.draw(rng));
    }
    w
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftEstimate {
    pub estimate: f64,
    pub trials: usize,
    pub n: usize,
    pub half_width: f64,
    pub seed: u64,
}

/// Mean of `|w_n|/n` over independent walks; trial `t` uses substream `t`.
/// Set `check` to refuse measures that fail [`validate_permissible`].
pub fn drift_estimate(mu: &StepMeasure, n: usize, trials: usize, seed: u64, check: bool) -> Result<DriftEstimate, WalkError> {
    if trials == 0 {
        return Err(WalkError::ZeroTrials);
    }
    if check {
        let report = validate_permissible(mu);
        if !report.passes() {
            return Err(WalkError::NotPermissible(report.failures().join(", ")));
        }
    }
    let speeds: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::substream(seed, t as u64);
            let w = walk_endpoint(mu, n, &mut r);
            if n == 0 { 0.0 } else { w.len() as f64 / n as f64 }
        })
        .collect();
    let summary = stats::mean(&speeds);
    Ok(DriftEstimate {
        estimate: summary.estimate,
        trials,
        n,
        half_width: summary.high - summary.estimate,
        seed,
    })
}
