//! Monte Carlo lower bounds for mixing of the conjugation action on
//! subgroups.
//!
//! For basic open sets `U ∋ K` and `V ∋ H`, a walk position `w` lies in
//! `N(U, V)` as soon as `L = ⟨w⁻¹Hw, K⟩` satisfies `L ∈ U` and `wLw⁻¹ ∈ V`.
//! Every success counted here is such a witness, so the estimates bound
//! `μ*ⁿ(N(U, V))` from below. A failed witness proves nothing.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::freegroup::{FreeGroup, FreeGroupError, Q, Word};
use crate::rng::{self, TrialRng};
use crate::stallings::{StallingsError, SubgroupAutomaton};
use crate::stats;
use crate::walks::{validate_permissible, walk_endpoint, StepMeasure};

pub const LOWER_BOUND_TAG: &str = "lower bound on mu^n(N(U,V))";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixingError {
    #[error("{which} has finite index")]
    FiniteIndex { which: String },
    #[error("measure is not permissible: {0}")]
    NotPermissible(String),
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("at least one pair is required")]
    NoPairs,
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

/// `{L ≤ G : L ∩ F = J ∩ F}` for a marker subgroup `J` and finite window `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicOpenSet {
    pub marker: SubgroupAutomaton,
    pub window: BTreeSet<Word>,
    hits: BTreeSet<Word>,
}

impl BasicOpenSet {
    pub fn new(marker: SubgroupAutomaton, window: impl IntoIterator<Item = Word>) -> BasicOpenSet {
        let window: BTreeSet<Word> = window.into_iter().collect();
        let hits = marker.trace(&window).hits;
        BasicOpenSet { marker, window, hits }
    }

    /// Window = ball of the given radius.
    pub fn ball(marker: SubgroupAutomaton, radius: usize) -> BasicOpenSet {
        let window = marker.group().ball(radius);
        BasicOpenSet::new(marker, window)
    }

    pub fn contains(&self, l: &SubgroupAutomaton) -> bool {
        l.trace(&self.window).hits == self.hits
    }

    pub fn marker_hits(&self) -> &BTreeSet<Word> {
        &self.hits
    }
}

/// `L = ⟨w⁻¹Hw, K⟩`.
pub fn witness_subgroup(h: &SubgroupAutomaton, k: &SubgroupAutomaton, w: &Word) -> Result<SubgroupAutomaton, MixingError> {
    Ok(h.conjugate(&w.inverse())?.join(k)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessOutcome {
    pub w: Word,
    pub l: SubgroupAutomaton,
    /// `L ∩ F = K ∩ F`.
    pub trace_k: bool,
    /// `wLw⁻¹ ∩ F = H ∩ F`.
    pub trace_h: bool,
    pub infinite_index: bool,
    /// `rank L = rank H + rank K`.
    pub free_product_rank: bool,
}

impl WitnessOutcome {
    pub fn success(&self) -> bool {
        self.trace_k && self.trace_h && self.infinite_index && self.free_product_rank
    }
}

pub fn check_witness(
    l: &SubgroupAutomaton,
    h: &SubgroupAutomaton,
    k: &SubgroupAutomaton,
    window: &BTreeSet<Word>,
    w: &Word,
) -> Result<WitnessOutcome, MixingError> {
    let conj = l.conjugate(w)?;
    Ok(WitnessOutcome {
        w: w.clone(),
        l: l.clone(),
        trace_k: l.trace(window).hits == k.trace(window).hits,
        trace_h: conj.trace(window).hits == h.trace(window).hits,
        infinite_index: !l.index().is_finite(),
        free_product_rank: l.rank() == h.rank() + k.rank(),
    })
}

/// One marker pair: `K` marks `U`, `H` marks `V`, both over the same window.
#[derive(Clone, Debug)]
pub struct MixingPair {
    pub h: SubgroupAutomaton,
    pub k: SubgroupAutomaton,
    pub window: BTreeSet<Word>,
}

impl MixingPair {
    pub fn new(h: SubgroupAutomaton, k: SubgroupAutomaton, window: impl IntoIterator<Item = Word>) -> MixingPair {
        MixingPair { h, k, window: window.into_iter().collect() }
    }

    fn validate(&self, index: usize) -> Result<(), MixingError> {
        if self.h.index().is_finite() {
            return Err(MixingError::FiniteIndex { which: format!("H of pair {index}") });
        }
        if self.k.index().is_finite() {
            return Err(MixingError::FiniteIndex { which: format!("K of pair {index}") });
        }
        Ok(())
    }

    pub fn outcome(&self, w: &Word) -> Result<WitnessOutcome, MixingError> {
        let l = witness_subgroup(&self.h, &self.k, w)?;
        check_witness(&l, &self.h, &self.k, &self.window, w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixingEstimate {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub interpretation: &'static str,
}

impl MixingEstimate {
    fn from_counts(n: usize, trials: usize, successes: usize, seed: u64, interpretation: &'static str) -> MixingEstimate {
        let ci = stats::proportion(successes as u64, trials as u64);
        MixingEstimate { n, trials, successes, p_hat: ci.estimate, ci_low: ci.low, ci_high: ci.high, seed, interpretation }
    }

    pub fn sigma(&self) -> f64 {
        stats::proportion_sigma(self.p_hat, self.trials as u64)
    }
}

fn check_measure(mu: &StepMeasure) -> Result<(), MixingError> {
    let report = validate_permissible(mu);
    if report.passes() {
        Ok(())
    } else {
        Err(MixingError::NotPermissible(report.failures().join(", ")))
    }
}

/// Runs `trial` for every index in parallel and returns the outcomes in
/// trial order.
fn run_trials<T: Send, F>(trials: usize, seed: u64, trial: F) -> Vec<T>
where
    F: Fn(&mut TrialRng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| trial(&mut rng::substream(seed, t as u64)))
        .collect()
}

pub fn estimate_mixing(pair: &MixingPair, mu: &StepMeasure, n: usize, trials: usize, seed: u64) -> Result<MixingEstimate, MixingError> {
    Ok(joint_mixing(std::slice::from_ref(pair), mu, n, trials, seed)?.joint)
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointEstimate {
    pub joint: MixingEstimate,
    pub marginals: Vec<MixingEstimate>,
}

/// Success of a trial means every pair's witness succeeds for the same `w_n`.
pub fn joint_mixing(pairs: &[MixingPair], mu: &StepMeasure, n: usize, trials: usize, seed: u64) -> Result<JointEstimate, MixingError> {
    if pairs.is_empty() {
        return Err(MixingError::NoPairs);
    }
    if trials == 0 {
        return Err(MixingError::ZeroTrials);
    }
    for (i, p) in pairs.iter().enumerate() {
        p.validate(i)?;
    }
    check_measure(mu)?;
    let outcomes: Vec<Result<Vec<bool>, MixingError>> = run_trials(trials, seed, |r| {
        let w = walk_endpoint(mu, n, r);
        pairs.iter().map(|p| p.outcome(&w).map(|o| o.success())).collect()
    });
    let mut per_pair = vec![0usize; pairs.len()];
    let mut joint = 0;
    for o in outcomes {
        let o = o?;
        for (count, ok) in per_pair.iter_mut().zip(&o) {
            *count += *ok as usize;
        }
        joint += o.iter().all(|&b| b) as usize;
    }
    Ok(JointEstimate {
        joint: MixingEstimate::from_counts(n, trials, joint, seed, LOWER_BOUND_TAG),
        marginals: per_pair
            .into_iter()
            .map(|s| MixingEstimate::from_counts(n, trials, s, seed, LOWER_BOUND_TAG))
            .collect(),
    })
}

/// Fraction of walks `g = w_n` with `g ≠ 1` and `⟨H, g⟩ = H ∗ ⟨g⟩`.
/// Finitely generated subgroups of `F_k` are convex cocompact, so that
/// condition holds automatically.
pub fn free_product_experiment(h: &SubgroupAutomaton, mu: &StepMeasure, n: usize, trials: usize, seed: u64) -> Result<MixingEstimate, MixingError> {
    if h.index().is_finite() {
        return Err(MixingError::FiniteIndex { which: "H".into() });
    }
    if trials == 0 {
        return Err(MixingError::ZeroTrials);
    }
    check_measure(mu)?;
    let outcomes: Vec<Result<bool, MixingError>> = run_trials(trials, seed, |r| {
        let g = walk_endpoint(mu, n, r);
        if g.is_identity() {
            return Ok(false);
        }
        Ok(h.certify_free_product(&g)?)
    });
    let mut successes = 0;
    for o in outcomes {
        successes += o? as usize;
    }
    Ok(MixingEstimate::from_counts(n, trials, successes, seed, "certified fraction with <H,g> = H * <g>"))
}

/// Folds `⟨w_{n,1}, …, w_{n,k}⟩` for independent walks driven by the
/// given measures, all drawn from one stream; the flag says whether the
/// rank is `k`.
pub fn random_subgroup_from(measures: &[StepMeasure], n: usize, rng: &mut TrialRng) -> (SubgroupAutomaton, bool) {
    let group = measures.first().map(StepMeasure::group).unwrap_or_else(|| FreeGroup::new(2).unwrap());
    let gens: Vec<Word> = measures.iter().map(|mu| walk_endpoint(mu, n, rng)).collect();
    let h = SubgroupAutomaton::from_generators(&group, &gens).expect("walk words lie in the group");
    let flag = h.rank() == measures.len();
    (h, flag)
}

pub fn random_subgroup(measures: &[StepMeasure], n: usize, seed: u64) -> (SubgroupAutomaton, bool) {
    random_subgroup_from(measures, n, &mut rng::substream(seed, 0))
}

/// Fraction of trials whose `k` walks generate a free group of rank `k`.
pub fn random_subgroup_experiment(mu: &StepMeasure, k: usize, n: usize, trials: usize, seed: u64) -> Result<MixingEstimate, MixingError> {
    if trials == 0 {
        return Err(MixingError::ZeroTrials);
    }
    let measures = vec![mu.clone(); k];
    let flags = run_trials(trials, seed, |r| random_subgroup_from(&measures, n, r).1);
    let successes = flags.into_iter().filter(|&b| b).count();
    Ok(MixingEstimate::from_counts(n, trials, successes, seed, "fraction of rank-k random subgroups"))
}

/// Summary of minimal quasi-geodesic constants of alternating paths.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiGeodesicProfile {
    pub n: usize,
    pub mean_c: f64,
    pub max_c: f64,
    /// `mean_c / n`.
    pub ratio: f64,
}

/// For each trial, draws `w = w_n` and an alternating label sequence
/// `h_1, w^{±1}, h_2, w^{±1}, …` with `2·blocks` labels, where the `h_i`
/// are uniform over the nontrivial elements of `H` of length at most 3,
/// and records the least `c` making the path a `(λ, c)`-quasi-geodesic.
pub fn quasi_geodesic_profile(
    h: &SubgroupAutomaton,
    mu: &StepMeasure,
    n: usize,
    trials: usize,
    blocks: usize,
    lambda: Q,
    seed: u64,
) -> Result<QuasiGeodesicProfile, MixingError> {
    if trials == 0 {
        return Err(MixingError::ZeroTrials);
    }
    let group = h.group();
    let short: Vec<Word> = group.ball(3).into_iter().filter(|x| !x.is_identity() && h.contains(x)).collect();
    if short.is_empty() {
        return Err(MixingError::FiniteIndex { which: "H has no short nontrivial element; H".into() });
    }
    let values: Vec<Option<f64>> = run_trials(trials, seed, |r| {
        let w = walk_endpoint(mu, n, r);
        if w.is_identity() {
            return None;
        }
        let mut labels = Vec::with_capacity(2 * blocks);
        for _ in 0..blocks {
            labels.push(short[r.random_range(0..short.len())].clone());
            labels.push(if r.random::<bool>() { w.clone() } else { w.inverse() });
        }
        let path = group.labeled_path(&labels, &Word::identity()).ok()?;
        let c = path.minimal_c(lambda).ok()?;
        Some(*c.numer() as f64 / *c.denom() as f64)
    });
    let cs: Vec<f64> = values.into_iter().flatten().collect();
    let mean_c = if cs.is_empty() { 0.0 } else { cs.iter().sum::<f64>() / cs.len() as f64 };
    let max_c = cs.iter().copied().fold(0.0, f64::max);
    Ok(QuasiGeodesicProfile { n, mean_c, max_c, ratio: if n == 0 { 0.0 } else { mean_c / n as f64 } })
}

/// Mean over trials of the shortest element `w⁻¹·h·w·k` with `h ∈ H∖1`,
/// `k ∈ K`, both of length at most 2.
pub fn long_words_profile(h: &SubgroupAutomaton, k: &SubgroupAutomaton, mu: &StepMeasure, n: usize, trials: usize, seed: u64) -> Result<f64, MixingError> {
    if trials == 0 {
        return Err(MixingError::ZeroTrials);
    }
    let group = h.group();
    let ball = group.ball(2);
    let hs: Vec<Word> = ball.iter().filter(|x| !x.is_identity() && h.contains(x)).cloned().collect();
    let ks: Vec<Word> = ball.iter().filter(|x| k.contains(x)).cloned().collect();
    let lengths = run_trials(trials, seed, |r| {
        let w = walk_endpoint(mu, n, r);
        let w_inv = w.inverse();
        hs.iter()
            .flat_map(|x| ks.iter().map(move |y| (x, y)))
            .map(|(x, y)| w_inv.mul(x).mul(&w).mul(y).len())
            .min()
            .unwrap_or(0) as f64
    });
    Ok(lengths.iter().sum::<f64>() / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FreeGroup {
        FreeGroup::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        f2().parse(s).unwrap()
    }

    fn sub(words: &[&str]) -> SubgroupAutomaton {
        let gens: Vec<Word> = words.iter().map(|s| w(s)).collect();
        SubgroupAutomaton::from_generators(&f2(), &gens).unwrap()
    }

    #[test]
    fn witness_examples() {
        let whole = witness_subgroup(&sub(&["a"]), &sub(&["b"]), &Word::identity()).unwrap();
        assert_eq!(whole, SubgroupAutomaton::whole(&f2()));
        let l = witness_subgroup(&sub(&["a"]), &sub(&["b"]), &w("ab")).unwrap();
        let direct = SubgroupAutomaton::from_generators(&f2(), &[w("BAaab"), w("b")]).unwrap();
        assert_eq!(l, direct);
        assert_eq!(witness_subgroup(&sub(&[]), &sub(&["ab"]), &w("bba")).unwrap(), sub(&["ab"]));
    }

    #[test]
    fn check_witness_examples() {
        let window: BTreeSet<Word> = f2().ball(1).into_iter().collect();
        let (h, k) = (sub(&["a"]), sub(&["b"]));
        let l = witness_subgroup(&h, &k, &Word::identity()).unwrap();
        let o = check_witness(&l, &h, &k, &window, &Word::identity()).unwrap();
        assert!(!o.trace_k && !o.success());

        let long = w("abbabaabbbabab");
        let l = witness_subgroup(&h, &k, &long).unwrap();
        assert!(check_witness(&l, &h, &k, &window, &long).unwrap().success());

        let t = sub(&[]);
        let l = witness_subgroup(&t, &t, &long).unwrap();
        let o = check_witness(&l, &t, &t, &window, &long).unwrap();
        assert!(o.trace_k && o.trace_h && o.infinite_index && o.free_product_rank);
    }

    #[test]
    fn basic_open_sets() {
        let u = BasicOpenSet::ball(sub(&["b"]), 2);
        assert!(u.contains(&u.marker));
        assert!(!u.contains(&SubgroupAutomaton::whole(&f2())));
    }

    #[test]
    fn mixing_edge_cases() {
        let mu = StepMeasure::simple(&f2());
        let pair = MixingPair::new(sub(&["a"]), sub(&["b"]), f2().ball(2));
        let zero = estimate_mixing(&pair, &mu, 0, 5, 1).unwrap();
        assert_eq!(zero.successes, 0);
        let one = estimate_mixing(&pair, &mu, 30, 1, 9).unwrap();
        assert_eq!(one, estimate_mixing(&pair, &mu, 30, 1, 9).unwrap());
        let bad = MixingPair::new(sub(&["aa", "ab", "bb"]), sub(&["b"]), f2().ball(1));
        assert!(matches!(estimate_mixing(&bad, &mu, 5, 5, 1), Err(MixingError::FiniteIndex { .. })));
        let joint = joint_mixing(std::slice::from_ref(&pair), &mu, 20, 50, 4).unwrap();
        assert_eq!(joint.joint, joint.marginals[0]);
        assert_eq!(joint.joint, estimate_mixing(&pair, &mu, 20, 50, 4).unwrap());
    }

    #[test]
    fn free_product_edge_cases() {
        let mu = StepMeasure::simple(&f2());
        assert_eq!(free_product_experiment(&sub(&["a"]), &mu, 0, 20, 3).unwrap().successes, 0);
        let trivial = free_product_experiment(&sub(&[]), &mu, 7, 200, 3).unwrap();
        // Odd length walks never return to the identity.
        assert_eq!(trivial.successes, 200);
    }

    #[test]
    fn random_subgroup_examples() {
        let a = StepMeasure::point_mass(&f2(), w("a")).unwrap();
        let (h, flag) = random_subgroup(&[a.clone(), a], 1, 5);
        assert_eq!((h.rank(), flag), (1, false));
        let mu = StepMeasure::simple(&f2());
        let (h, flag) = random_subgroup(std::slice::from_ref(&mu), 3, 5);
        assert_eq!((h.rank(), flag), (1, true));
    }
}
