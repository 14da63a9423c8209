//! Transversality of elements to subgroups, and the element constructor.
//!
//! # Deciding whether a power of `f` is conjugate into `H`
//!
//! Write `f = t·c·t⁻¹` with `c` cyclically reduced. Because `c` is cyclically
//! reduced, `cᵐ` is a reduced word, and a cyclically reduced word is
//! conjugate into `H` exactly when it labels a closed path at some state of
//! the core graph. Reading `c` once from a state is a partial injection `φ`
//! on the states (the graph is folded, so it is deterministic in both
//! directions). If `cᵐ` closes at `q` then `q` lies on a cycle of `φ`, whose
//! length is at most the number of states, and `c` read that many times
//! also closes at `q`. So it is enough to try `m ≤ #states`.
//!
//! A loop of `cᵐ` at `q`, reached from the base by the tree path `p_q`,
//! means `p_q·cᵐ·p_q⁻¹ ∈ H`, hence `fᵐ ∈ vHv⁻¹` for `v = t·p_q⁻¹`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::freegroup::{FreeGroup, FreeGroupError, HalfInteger, Root, Word};
use crate::stallings::{StallingsError, SubgroupAutomaton};

/// Largest `n` tried in [`construct_transverse`].
pub const EXPONENT_CAP: u32 = 64;
/// Largest radius searched for the auxiliary element in [`construct_transverse`].
pub const AUX_RADIUS_CAP: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransverseError {
    #[error("the element must be nontrivial")]
    IdentityElement,
    #[error("target {0} has finite index, so no element is transverse to it")]
    FiniteIndexTarget(usize),
    #[error("no transverse element found with exponent up to {largest_n}")]
    SearchExhausted { largest_n: u32 },
    #[error("no auxiliary element outside the forbidden cosets within radius {0}")]
    NoAuxiliary(usize),
    #[error("targets and element live in different free groups")]
    RankMismatch,
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

/// `fᵐ ∈ vHv⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerConjugacy {
    pub m: u32,
    pub v: Word,
}

fn nontrivial(f: &Word) -> Result<(), TransverseError> {
    if f.is_identity() {
        Err(TransverseError::IdentityElement)
    } else {
        Ok(())
    }
}

/// States at which `c^m` closes for some `m ≤ #states`, with the least such
/// `m`, for `c` cyclically reduced.
fn closing_states(h: &SubgroupAutomaton, c: &Word) -> Vec<(usize, u32)> {
    let bound = h.num_states();
    let mut out = Vec::new();
    for q in 0..bound {
        let mut s = q;
        for m in 1..=bound as u32 {
            match h.read(s, c) {
                Some(t) => s = t,
                None => break,
            }
            if s == q {
                out.push((q, m));
                break;
            }
        }
    }
    out
}

/// The least `m ≥ 1` with `fᵐ` conjugate into `H`, with a conjugator, or
/// `None` when no power is.
pub fn power_conjugate_into(h: &SubgroupAutomaton, f: &Word) -> Result<Option<PowerConjugacy>, TransverseError> {
    nontrivial(f)?;
    h.group().check(f)?;
    let reduction = f.cyclic_reduce();
    let closing = closing_states(h, &reduction.core);
    let Some(&(q, m)) = closing.iter().min_by_key(|(q, m)| (*m, *q)) else {
        return Ok(None);
    };
    let paths = h.state_paths();
    Ok(Some(PowerConjugacy { m, v: reduction.conjugator.mul(&paths[q].inverse()) }))
}

pub fn is_transverse(h: &SubgroupAutomaton, f: &Word) -> Result<bool, TransverseError> {
    Ok(power_conjugate_into(h, f)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Transverse,
    Witness(PowerConjugacy),
}

/// The outcome of [`power_conjugate_into`] packaged for export.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransversalityCertificate {
    pub subgroup_generators: Vec<Word>,
    pub subgroup_states: usize,
    pub element: Word,
    pub verdict: Verdict,
    /// Largest exponent that had to be examined.
    pub exponent_bound: usize,
}

impl TransversalityCertificate {
    pub fn issue(h: &SubgroupAutomaton, f: &Word) -> Result<TransversalityCertificate, TransverseError> {
        let verdict = match power_conjugate_into(h, f)? {
            None => Verdict::Transverse,
            Some(w) => Verdict::Witness(w),
        };
        Ok(TransversalityCertificate {
            subgroup_generators: h.generators(),
            subgroup_states: h.num_states(),
            element: f.clone(),
            verdict,
            exponent_bound: h.num_states(),
        })
    }

    /// Re-derives the verdict: a witness must satisfy `fᵐ ∈ vHv⁻¹`; a
    /// transverse verdict must survive the closed-loop scan.
    pub fn check(&self, h: &SubgroupAutomaton) -> Result<bool, TransverseError> {
        match &self.verdict {
            Verdict::Witness(PowerConjugacy { m, v }) => {
                Ok(h.conjugate(v)?.contains(&self.element.pow(*m as i64)))
            }
            Verdict::Transverse => Ok(closing_states(h, &self.element.cyclic_reduce().core).is_empty()),
        }
    }

    pub fn is_transverse(&self) -> bool {
        self.verdict == Verdict::Transverse
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let gens: Vec<String> = self.subgroup_generators.iter().map(Word::to_string).collect();
        let mut out = String::new();
        writeln!(out, "subgroup_generators: {}", if gens.is_empty() { "-".to_string() } else { gens.join(",") }).unwrap();
        writeln!(out, "subgroup_states: {}", self.subgroup_states).unwrap();
        writeln!(out, "element: {}", self.element).unwrap();
        writeln!(out, "exponent_bound: {}", self.exponent_bound).unwrap();
        match &self.verdict {
            Verdict::Transverse => writeln!(out, "verdict: transverse").unwrap(),
            Verdict::Witness(PowerConjugacy { m, v }) => {
                writeln!(out, "verdict: witness").unwrap();
                writeln!(out, "m: {m}").unwrap();
                writeln!(out, "v: {v}").unwrap();
            }
        }
        out
    }
}

/// `|{m ∈ range : d(fᵐ, v·H) ≤ E}|`, using `d(fᵐ, vH) = d(v⁻¹fᵐ, H)`.
pub fn overlap_count(h: &SubgroupAutomaton, f: &Word, v: &Word, e: usize, range: RangeInclusive<i64>) -> usize {
    let v_inv = v.inverse();
    powers(f, range).filter(|p| h.distance_to_orbit(&v_inv.mul(p)) <= e).count()
}

fn powers(f: &Word, range: RangeInclusive<i64>) -> impl Iterator<Item = Word> {
    let (lo, hi) = (*range.start(), *range.end());
    let mut current = f.pow(lo);
    let f = f.clone();
    (lo..=hi).map(move |m| {
        let out = current.clone();
        if m < hi {
            current.right_multiply(&f);
        }
        out
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapReport {
    pub element: Word,
    pub e: usize,
    pub radius: usize,
    pub range: RangeInclusive<i64>,
    /// Count for every conjugator in the ball.
    pub counts: BTreeMap<Word, usize>,
}

impl OverlapReport {
    pub fn max_count(&self) -> usize {
        self.counts.values().copied().max().unwrap_or(0)
    }
}

pub fn overlap_bound(h: &SubgroupAutomaton, f: &Word, e: usize, radius: usize, range: RangeInclusive<i64>) -> OverlapReport {
    let all: Vec<Word> = powers(f, range.clone()).collect();
    let counts = h
        .group()
        .ball(radius)
        .into_iter()
        .map(|v| {
            let v_inv = v.inverse();
            let count = all.iter().filter(|p| h.distance_to_orbit(&v_inv.mul(p)) <= e).count();
            (v, count)
        })
        .collect();
    OverlapReport { element: f.clone(), e, radius, range, counts }
}

/// Right coset representatives `U₀` such that `u⁻¹Hu ∩ ⟨g⟩ ≠ 1` forces
/// `u ∈ H·U₀`, together with the maximal cyclic subgroup `⟨root⟩` of `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenSet {
    pub u0: Vec<Word>,
    pub root: Root,
}

/// One representative `p_q·t⁻¹` per state `q` on a closed `c`-cycle, where
/// `g = t·c·t⁻¹`.
pub fn compute_u0(h: &SubgroupAutomaton, g: &Word) -> Result<ForbiddenSet, TransverseError> {
    nontrivial(g)?;
    h.group().check(g)?;
    let reduction = g.cyclic_reduce();
    let paths = h.state_paths();
    let t_inv = reduction.conjugator.inverse();
    let mut u0: Vec<Word> = closing_states(h, &reduction.core)
        .into_iter()
        .map(|(q, _)| paths[q].mul(&t_inv))
        .collect();
    u0.sort();
    Ok(ForbiddenSet { u0, root: g.root()? })
}

/// Result of the apt search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AptReport {
    pub n: u32,
    /// Elements `u` of the `C`-ball with `d(u·gᴺ, H) ≤ C`.
    pub filtered: Vec<Word>,
    /// Shortlex-least representative of each right coset `Hu` met.
    pub cosets: Vec<Word>,
    pub verified: bool,
}

fn coset_representatives(h: &SubgroupAutomaton, words: &[Word]) -> Vec<Word> {
    let mut reps: Vec<Word> = Vec::new();
    let mut sorted = words.to_vec();
    sorted.sort();
    for u in sorted {
        if !reps.iter().any(|r| h.contains(&u.mul(&r.inverse()))) {
            reps.push(u);
        }
    }
    reps
}

/// Searches `N = 1, …, n_cap` for the first exponent at which the cosets of
/// `{u : |u| ≤ C, d(u·gᴺ, H) ≤ C}` agree with those at `N + 1`.
pub fn apt_check(h: &SubgroupAutomaton, g: &Word, c: usize, n_cap: u32) -> Result<AptReport, TransverseError> {
    nontrivial(g)?;
    h.group().check(g)?;
    let ball = h.group().ball(c);
    let at = |n: u32| {
        let gn = g.pow(n as i64);
        let filtered: Vec<Word> = ball.iter().filter(|u| h.distance_to_orbit(&u.mul(&gn)) <= c).cloned().collect();
        let cosets = coset_representatives(h, &filtered);
        (filtered, cosets)
    };
    let (mut filtered, mut cosets) = at(1);
    for n in 1..=n_cap {
        let (next_filtered, next_cosets) = at(n + 1);
        if next_cosets == cosets {
            return Ok(AptReport { n, filtered, cosets, verified: true });
        }
        filtered = next_filtered;
        cosets = next_cosets;
    }
    Ok(AptReport { n: n_cap, filtered, cosets, verified: false })
}

/// `f = gⁿ·a` together with its certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub f: Word,
    pub n: u32,
    pub a: Word,
    pub forbidden: Vec<ForbiddenSet>,
    pub certificates: Vec<TransversalityCertificate>,
}

/// Picks `a` as the shortlex-least element outside every `U₀ᵢ⁻¹·Hᵢ·U₀ᵢ` and
/// outside `⟨root(g)⟩`, then the least `n ≤ 64` making `gⁿa` transverse to
/// every target.
pub fn construct_transverse(targets: &[SubgroupAutomaton], g: &Word) -> Result<Construction, TransverseError> {
    nontrivial(g)?;
    let Some(first) = targets.first() else {
        return Err(TransverseError::RankMismatch);
    };
    let group: FreeGroup = first.group();
    group.check(g)?;
    for (i, h) in targets.iter().enumerate() {
        if h.rank_of_group() != group.rank() {
            return Err(TransverseError::RankMismatch);
        }
        if h.index().is_finite() {
            return Err(TransverseError::FiniteIndexTarget(i));
        }
    }
    let forbidden: Vec<ForbiddenSet> = targets.iter().map(|h| compute_u0(h, g)).collect::<Result<_, _>>()?;
    let elementary = SubgroupAutomaton::from_generators(&group, &[forbidden[0].root.root.clone()])?;
    let excluded = |x: &Word| {
        elementary.contains(x)
            || targets.iter().zip(&forbidden).any(|(h, fs)| {
                fs.u0.iter().any(|u| fs.u0.iter().any(|u2| h.contains(&u.mul(x).mul(&u2.inverse()))))
            })
    };
    let a = (0..=AUX_RADIUS_CAP)
        .flat_map(|r| group.sphere(r))
        .find(|x| !excluded(x))
        .ok_or(TransverseError::NoAuxiliary(AUX_RADIUS_CAP))?;
    for n in 1..=EXPONENT_CAP {
        let f = g.pow(n as i64).mul(&a);
        if f.is_identity() {
            continue;
        }
        let certificates: Vec<TransversalityCertificate> =
            targets.iter().map(|h| TransversalityCertificate::issue(h, &f)).collect::<Result<_, _>>()?;
        if certificates.iter().all(TransversalityCertificate::is_transverse) {
            return Ok(Construction { f, n, a, forbidden, certificates });
        }
    }
    Err(TransverseError::SearchExhausted { largest_n: EXPONENT_CAP })
}

/// `max (gᵏ | h)_1` over `k ∈ ks` and `h ∈ H` with `|h| ≤ orbit_radius`.
pub fn max_gromov_product(h: &SubgroupAutomaton, g: &Word, ks: RangeInclusive<i64>, orbit_radius: usize) -> HalfInteger {
    let group = h.group();
    let orbit: Vec<Word> = group.ball(orbit_radius).into_iter().filter(|x| h.contains(x)).collect();
    let one = Word::identity();
    powers(g, ks)
        .flat_map(|p| orbit.iter().map(move |x| (p.clone(), x)).collect::<Vec<_>>())
        .map(|(p, x)| group.gromov_product(&p, x, &one))
        .max()
        .unwrap_or(HalfInteger::from_integer(0))
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

    fn pc(m: u32, v: &str) -> Option<PowerConjugacy> {
        Some(PowerConjugacy { m, v: w(v) })
    }

    #[test]
    fn power_conjugacy_examples() {
        assert_eq!(power_conjugate_into(&sub(&["a"]), &w("a")).unwrap(), pc(1, "1"));
        assert_eq!(power_conjugate_into(&sub(&["a"]), &w("b")).unwrap(), None);
        assert_eq!(power_conjugate_into(&sub(&["aa", "bb"]), &w("a")).unwrap(), pc(2, "1"));
        assert_eq!(power_conjugate_into(&sub(&["a"]), &Word::identity()), Err(TransverseError::IdentityElement));
    }

    #[test]
    fn transversality_examples() {
        assert!(is_transverse(&sub(&["a"]), &w("ab")).unwrap());
        assert_eq!(power_conjugate_into(&sub(&["a"]), &w("baB")).unwrap(), pc(1, "b"));
        assert!(!is_transverse(&sub(&["ab"]), &w("ab")).unwrap());
    }

    #[test]
    fn certificates_check_out() {
        for (h, f) in [(sub(&["a"]), w("ab")), (sub(&["aa", "bb"]), w("a")), (sub(&["abA"]), w("aab"))] {
            let cert = TransversalityCertificate::issue(&h, &f).unwrap();
            assert!(cert.check(&h).unwrap(), "{}", cert.to_text());
        }
        let cert = TransversalityCertificate::issue(&sub(&["aa", "bb"]), &w("a")).unwrap();
        assert_eq!(
            cert.to_text(),
            "subgroup_generators: aa,bb\nsubgroup_states: 3\nelement: a\nexponent_bound: 3\nverdict: witness\nm: 2\nv: 1\n"
        );
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_count(&sub(&["a"]), &w("b"), &Word::identity(), 2, -10..=10), 5);
        assert_eq!(overlap_count(&sub(&["a"]), &w("a"), &Word::identity(), 0, -10..=10), 21);
        assert_eq!(overlap_count(&sub(&["a"]), &w("ab"), &Word::identity(), 0, -10..=10), 1);
    }

    #[test]
    fn forbidden_set_examples() {
        let u0 = |h: &[&str], g: &str| -> Vec<String> {
            compute_u0(&sub(h), &w(g)).unwrap().u0.iter().map(Word::to_string).collect()
        };
        assert_eq!(u0(&["a"], "a"), ["1"]);
        assert!(u0(&["a"], "b").is_empty());
        // Both states of the parity-of-a automaton carry an a-cycle:
        // a⁻¹⟨a², b²⟩a also meets ⟨a⟩, and a is not in ⟨a², b²⟩.
        assert_eq!(u0(&["aa", "bb"], "a"), ["1", "a"]);
        assert!(sub(&["aa", "bb"]).conjugate(&w("A")).unwrap().contains(&w("aa")));
    }

    #[test]
    fn apt_examples() {
        let r = apt_check(&sub(&["a"]), &w("b"), 0, 16).unwrap();
        assert_eq!((r.n, r.cosets.len(), r.verified), (1, 0, true));
        let r = apt_check(&sub(&["a"]), &w("a"), 0, 16).unwrap();
        assert_eq!((r.filtered.clone(), r.verified), (vec![Word::identity()], true));
        let r = apt_check(&sub(&["a"]), &w("ab"), 1, 16).unwrap();
        assert!(r.verified);
    }

    #[test]
    fn construction_examples() {
        let c = construct_transverse(&[sub(&["a"])], &w("a")).unwrap();
        assert_eq!((c.a.to_string(), c.n, c.f.to_string()), ("b".into(), 1, "ab".into()));
        let c = construct_transverse(&[sub(&["a"]), sub(&["b"])], &w("ab")).unwrap();
        assert!(c.certificates.iter().all(|x| x.is_transverse()));
        assert!(is_transverse(&sub(&["a"]), &c.f).unwrap() && is_transverse(&sub(&["b"]), &c.f).unwrap());
        assert_eq!(
            construct_transverse(&[sub(&["aa", "ab", "bb"])], &w("a")),
            Err(TransverseError::FiniteIndexTarget(0))
        );
    }
}
