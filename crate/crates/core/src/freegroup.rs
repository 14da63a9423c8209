//! Free groups `F_k` and the geometry of their Cayley trees.
//!
//! Elements are freely reduced words. The Cayley tree of `F_k` with respect to
//! the standard basis has the group elements as vertices, so a [`Word`] is both
//! a group element and a point of the tree, and `d(u, v) = |u⁻¹v|`. The
//! basepoint of every orbit computation is the identity.
//!
//! Generators are written `a, b, c, …`; their inverses `A, B, C, …`; the
//! identity prints as `1`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

/// Exact rationals used for quasi-geodesic and broken-geodesic constants.
pub type Q = Ratio<i64>;

/// Hyperbolicity constants of the Cayley tree. Every tree is 0-hyperbolic,
/// so all constants of the form `c·δ` vanish and the geometric lemmas become
/// exact statements.
pub mod tree_constants {
    /// Slim-triangle constant of a tree.
    pub const DELTA: i64 = 0;
    /// Geodesic triangles are `6δ`-thin.
    pub const THIN_TRIANGLES: i64 = 6 * DELTA;
    /// Geodesic quadrangles are `2δ`-slim.
    pub const SLIM_QUADRANGLES: i64 = 2 * DELTA;
    /// Gromov products are `12δ`-hyperbolic.
    pub const GROMOV_HYPERBOLICITY: i64 = 12 * DELTA;
    /// Lower bound on `C0` in the broken-geodesic criterion (`168δ`).
    pub const BROKEN_GEODESIC_C0_MIN: i64 = 168 * DELTA;
    /// Basepoint change for orbit quasi-convexity adds `2δ + 2d(s, t)`; with
    /// the basepoint fixed at the identity the hull of a subgroup orbit is
    /// 0-quasi-convex.
    pub const ORBIT_QUASI_CONVEXITY: i64 = 0;

    /// Strict lower bound on `C1` in the broken-geodesic criterion,
    /// `12(C0 + 12δ)`.
    pub fn broken_geodesic_c1_threshold(c0: super::Q) -> super::Q {
        (c0 + super::Q::from_integer(12 * DELTA)) * 12
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeGroupError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },
    #[error("invalid character {0:?} in word")]
    BadCharacter(char),
    #[error("the identity has no root")]
    IdentityHasNoRoot,
    #[error("path label {0} is the identity")]
    EmptyLabel(usize),
    #[error("a path needs at least one label")]
    EmptyPath,
    #[error("multiplicative constant must be at least 1, got {0}")]
    InvalidLambda(Q),
    #[error("broken geodesic constants violate C0 >= 0 and C1 > 12*C0: C0 = {c0}, C1 = {c1}")]
    InvalidConstants { c0: Q, c1: Q },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

/// A generator or inverse generator. The code is `2·index + inverse`, which
/// also fixes the letter order `a < A < b < B < …`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator < 26, "at most 26 generators are supported");
        Letter((2 * generator + inverse as usize) as u8)
    }

    pub fn from_code(code: usize) -> Letter {
        assert!(code < 52);
        Letter(code as u8)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new(c as usize - 'a' as usize, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new(c as usize - 'A' as usize, true))
        } else {
            None
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }
}

/// A freely reduced word.
///
/// Ordered shortlex: by length, then lexicographically with `a < A < b < B`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn letter(l: Letter) -> Word {
        Word { letters: vec![l] }
    }

    /// Freely reduces an arbitrary letter sequence with a single stack pass.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    /// Wraps letters that the caller guarantees are already reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        Word { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// `self ← self·other`, in place.
    pub fn right_multiply(&mut self, other: &Word) {
        for &l in &other.letters {
            push_reduced(&mut self.letters, l);
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Largest generator index used, plus one.
    pub fn required_rank(&self) -> usize {
        self.letters.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &Word) -> Word {
        let k = common_cancellation(&self.letters, &other.letters);
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * k);
        letters.extend_from_slice(&self.letters[..self.len() - k]);
        letters.extend_from_slice(&other.letters[k..]);
        Word { letters }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..exponent.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `u·v·u⁻¹`.
    pub fn conjugate_by(&self, u: &Word) -> Word {
        u.mul(self).mul(&u.inverse())
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.letters
            .iter()
            .zip(&other.letters)
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word { letters: self.letters[..len].to_vec() }
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word { letters: self.letters[start..].to_vec() }
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.letters.starts_with(&prefix.letters)
    }

    /// Tree distance `d(u, v) = |u⁻¹v|`.
    pub fn distance(&self, other: &Word) -> usize {
        let p = self.common_prefix_len(other);
        self.len() + other.len() - 2 * p
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Splits `w = conjugator · core · conjugator⁻¹` with `core` cyclically
    /// reduced.
    pub fn cyclic_reduce(&self) -> CyclicReduction {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        CyclicReduction {
            core: Word { letters: self.letters[k..n - k].to_vec() },
            conjugator: Word { letters: self.letters[..k].to_vec() },
        }
    }

    /// Maximal root: `w = rᵐ` with `m` as large as possible.
    pub fn root(&self) -> Result<Root, FreeGroupError> {
        if self.is_identity() {
            return Err(FreeGroupError::IdentityHasNoRoot);
        }
        let CyclicReduction { core, conjugator } = self.cyclic_reduce();
        let n = core.len();
        let period = (1..=n)
            .filter(|p| n % p == 0)
            .find(|&p| (p..n).all(|i| core.letters[i] == core.letters[i - p]))
            .expect("the full length is always a period");
        let core_root = core.prefix(period);
        Ok(Root {
            root: core_root.conjugate_by(&conjugator),
            power: (n / period) as u32,
            core_root,
            conjugator,
        })
    }
}

#[inline]
fn push_reduced(stack: &mut Vec<Letter>, l: Letter) {
    if stack.last() == Some(&l.inverse()) {
        stack.pop();
    } else {
        stack.push(l);
    }
}

/// Number of letters cancelled when concatenating `u` and `v`.
fn common_cancellation(u: &[Letter], v: &[Letter]) -> usize {
    u.iter()
        .rev()
        .zip(v)
        .take_while(|(a, b)| **a == b.inverse())
        .count()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicReduction {
    pub core: Word,
    pub conjugator: Word,
}

/// Maximal root of a nontrivial element. The maximal cyclic subgroup
/// containing `w` is `⟨root⟩ = conjugator·⟨core_root⟩·conjugator⁻¹`; in a
/// free group this is the maximal elementary subgroup of `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub root: Word,
    pub power: u32,
    pub core_root: Word,
    pub conjugator: Word,
}

/// Gromov products in a tree are half-integers; stored doubled.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HalfInteger(i64);

impl HalfInteger {
    pub fn from_doubled(twice: i64) -> HalfInteger {
        HalfInteger(twice)
    }

    pub fn from_integer(n: i64) -> HalfInteger {
        HalfInteger(2 * n)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn to_ratio(self) -> Q {
        Q::new(self.0, 2)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A path in the Cayley tree made of geodesic segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePath {
    vertices: Vec<Word>,
    labels: Vec<Word>,
}

impl TreePath {
    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn labels(&self) -> &[Word] {
        &self.labels
    }

    pub fn start(&self) -> &Word {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Word {
        self.vertices.last().expect("a path has at least one vertex")
    }

    /// `‖p‖`, the sum of the segment lengths.
    pub fn length(&self) -> usize {
        self.labels.iter().map(Word::len).sum()
    }

    /// The unit steps of the path, one letter per traversed edge.
    fn steps(&self) -> impl Iterator<Item = Letter> + '_ {
        self.labels.iter().flat_map(|w| w.letters.iter().copied())
    }

    /// Largest `‖q‖ − λ·d(q₋, q₊)` over subpaths `q` between vertices of the
    /// tree visited by the path (including the trivial subpath).
    fn worst_excess(&self, lambda: Q) -> Q {
        let steps: Vec<Letter> = self.steps().collect();
        let mut worst = Q::from_integer(0);
        let mut stack: Vec<Letter> = Vec::with_capacity(steps.len());
        for i in 0..steps.len() {
            stack.clear();
            for (j, &l) in steps[i..].iter().enumerate() {
                push_reduced(&mut stack, l);
                let excess = Q::from_integer(j as i64 + 1) - lambda * stack.len() as i64;
                if excess > worst {
                    worst = excess;
                }
            }
        }
        worst
    }

    /// Whether every subpath `q` satisfies `‖q‖ ≤ λ·d(q₋, q₊) + c`.
    pub fn is_quasi_geodesic(&self, lambda: Q, c: Q) -> Result<bool, FreeGroupError> {
        check_lambda(lambda)?;
        Ok(self.worst_excess(lambda) <= c)
    }

    /// Least `c ≥ 0` for which the path is a `(λ, c)`-quasi-geodesic.
    pub fn minimal_c(&self, lambda: Q) -> Result<Q, FreeGroupError> {
        check_lambda(lambda)?;
        Ok(self.worst_excess(lambda))
    }
}

fn check_lambda(lambda: Q) -> Result<(), FreeGroupError> {
    if lambda < Q::from_integer(1) {
        Err(FreeGroupError::InvalidLambda(lambda))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BrokenGeodesicReport {
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

/// The free group of a fixed rank, acting on its Cayley tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FreeGroup {
    rank: usize,
}

impl FreeGroup {
    pub fn new(rank: usize) -> Result<FreeGroup, FreeGroupError> {
        if rank < 2 {
            return Err(FreeGroupError::RankTooSmall(rank));
        }
        if rank > 26 {
            return Err(FreeGroupError::GeneratorOutOfRange { index: rank, rank: 26 });
        }
        Ok(FreeGroup { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The basepoint of all orbit computations.
    pub fn basepoint(&self) -> Word {
        Word::identity()
    }

    /// Number of letters, `2k`.
    pub fn alphabet_size(&self) -> usize {
        2 * self.rank
    }

    /// All `2k` letters in the order `a, A, b, B, …`.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + Clone {
        (0..2 * self.rank).map(Letter::from_code)
    }

    pub fn generator(&self, index: usize) -> Result<Word, FreeGroupError> {
        if index >= self.rank {
            return Err(FreeGroupError::GeneratorOutOfRange { index, rank: self.rank });
        }
        Ok(Word::letter(Letter::new(index, false)))
    }

    /// Reduces a raw sequence of `(generator index, sign)` pairs, with
    /// 0-based generator indices.
    pub fn reduce(&self, raw: &[(usize, i8)]) -> Result<Word, FreeGroupError> {
        let mut letters = Vec::with_capacity(raw.len());
        for &(index, sign) in raw {
            if index >= self.rank {
                return Err(FreeGroupError::GeneratorOutOfRange { index, rank: self.rank });
            }
            letters.push(Letter::new(index, sign < 0));
        }
        Ok(Word::reduce(letters))
    }

    /// Parses the word syntax: letters from the first `k` of `a..z` and their
    /// uppercase inverses. `1` and the empty string denote the identity.
    /// Whitespace is ignored; the input need not be reduced.
    pub fn parse(&self, text: &str) -> Result<Word, FreeGroupError> {
        let trimmed = text.trim();
        if trimmed == "1" || trimmed.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(trimmed.len());
        for c in trimmed.chars().filter(|c| !c.is_whitespace()) {
            let l = Letter::from_char(c).ok_or(FreeGroupError::BadCharacter(c))?;
            if l.generator() >= self.rank {
                return Err(FreeGroupError::GeneratorOutOfRange {
                    index: l.generator(),
                    rank: self.rank,
                });
            }
            letters.push(l);
        }
        Ok(Word::reduce(letters))
    }

    /// Checks that a word only uses generators of this group.
    pub fn check(&self, w: &Word) -> Result<(), FreeGroupError> {
        match w.letters.iter().find(|l| l.generator() >= self.rank) {
            Some(l) => Err(FreeGroupError::GeneratorOutOfRange {
                index: l.generator(),
                rank: self.rank,
            }),
            None => Ok(()),
        }
    }

    /// All reduced words of length exactly `radius`, in shortlex order.
    pub fn sphere(&self, radius: usize) -> Vec<Word> {
        let mut layer = vec![Word::identity()];
        for _ in 0..radius {
            let mut next = Vec::with_capacity(layer.len() * (2 * self.rank - 1));
            for w in &layer {
                for l in self.letters() {
                    if w.last() != Some(l.inverse()) {
                        let mut letters = w.letters.clone();
                        letters.push(l);
                        next.push(Word { letters });
                    }
                }
            }
            layer = next;
        }
        layer
    }

    /// The ball of the given radius about the identity, in shortlex order.
    pub fn ball(&self, radius: usize) -> Vec<Word> {
        (0..=radius).flat_map(|r| self.sphere(r)).collect()
    }

    /// `(x | y)_s = ½(d(x,s) + d(y,s) − d(x,y))`.
    pub fn gromov_product(&self, x: &Word, y: &Word, s: &Word) -> HalfInteger {
        let twice = x.distance(s) as i64 + y.distance(s) as i64 - x.distance(y) as i64;
        HalfInteger::from_doubled(twice)
    }

    /// Vertices of the geodesic `[x, y]`, from `x` to `y`.
    pub fn geodesic(&self, x: &Word, y: &Word) -> Vec<Word> {
        let step = x.inverse().mul(y);
        let mut out = Vec::with_capacity(step.len() + 1);
        let mut current = x.clone();
        out.push(current.clone());
        for &l in &step.letters {
            current = current.mul(&Word::letter(l));
            out.push(current.clone());
        }
        out
    }

    /// `d(s, [x, y])`, by scanning the vertices of the geodesic.
    pub fn distance_to_geodesic(&self, s: &Word, x: &Word, y: &Word) -> usize {
        self.geodesic(x, y)
            .iter()
            .map(|v| v.distance(s))
            .min()
            .expect("a geodesic has at least one vertex")
    }

    /// The path based at `base` labeled by `labels`: vertices
    /// `base, base·g₁, base·g₁g₂, …`, joined by geodesic segments.
    pub fn labeled_path(&self, labels: &[Word], base: &Word) -> Result<TreePath, FreeGroupError> {
        if labels.is_empty() {
            return Err(FreeGroupError::EmptyPath);
        }
        let mut vertices = Vec::with_capacity(labels.len() + 1);
        vertices.push(base.clone());
        for (i, g) in labels.iter().enumerate() {
            if g.is_identity() {
                return Err(FreeGroupError::EmptyLabel(i));
            }
            let next = vertices[i].mul(g);
            vertices.push(next);
        }
        Ok(TreePath { vertices, labels: labels.to_vec() })
    }

    /// Evaluates the broken-geodesic criterion at `δ = 0`.
    ///
    /// The hypothesis asks for `d(x_{i−1}, x_i) ≥ C1` for every `i` and
    /// `(x_{i−1} | x_{i+1})_{x_i} ≤ C0` at every interior point; the
    /// conclusion asks every `x_i` to lie within `2·C0` of `[x_0, x_m]`.
    /// Both sides are always evaluated.
    pub fn broken_geodesic_check(
        &self,
        points: &[Word],
        c0: Q,
        c1: Q,
    ) -> Result<BrokenGeodesicReport, FreeGroupError> {
        if c0 < Q::from_integer(tree_constants::BROKEN_GEODESIC_C0_MIN)
            || c1 <= tree_constants::broken_geodesic_c1_threshold(c0)
        {
            return Err(FreeGroupError::InvalidConstants { c0, c1 });
        }
        if points.len() < 2 {
            return Err(FreeGroupError::TooFewPoints { needed: 2, got: points.len() });
        }
        let separated = points
            .windows(2)
            .all(|p| Q::from_integer(p[0].distance(&p[1]) as i64) >= c1);
        let small_products = points
            .windows(3)
            .all(|p| self.gromov_product(&p[0], &p[2], &p[1]).to_ratio() <= c0);
        let first = &points[0];
        let last = points.last().unwrap();
        let conclusion_holds = points.iter().all(|x| {
            Q::from_integer(self.distance_to_geodesic(x, first, last) as i64) <= c0 * 2
        });
        Ok(BrokenGeodesicReport {
            hypothesis_holds: separated && small_products,
            conclusion_holds,
        })
    }
}
