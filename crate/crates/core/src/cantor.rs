//! The group `G = F₂ ∗ S₁₈` acting on the boundary of the Cayley tree of
//! `F₃ = F(x, y, z)`.
//!
//! Boundary points are infinite reduced words; a finite reduced word `w`
//! (a [`ConeLabel`]) stands for the cone of all points with prefix `w`.
//! `F₂ = F(x, y)` acts by left multiplication. `S₁₈` permutes the 18
//! length-2 labels containing `z` or `z⁻¹` (the set `Ω`) and carries each
//! cone onto its image by the order-preserving bijection [`xi`]; points whose
//! first two letters lie in `F₂` are fixed.
//!
//! Letters are ordered `x < X < y < Y < z < Z`, uppercase meaning inverse.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::freegroup::{Letter, Word, Q};
use crate::rng::{self, TrialRng};
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CantorError {
    #[error("cone labels must be nonempty")]
    EmptyLabel,
    #[error("invalid character {0:?} in a cone label (use x, y, z and X, Y, Z)")]
    BadCharacter(char),
    #[error("label {0} is not freely reduced")]
    NotReduced(String),
    #[error("{u} is not a prefix of {w}")]
    NotPrefix { u: String, w: String },
    #[error("label {0} lies in F(x,y); deepen it first")]
    InsideF2(String),
    #[error("label {0} is the pivot z^-n")]
    PivotLabel(String),
    #[error("labels must have length at least 2, got {0}")]
    TooShort(usize),
    #[error("labels must all have length {expected}, got {label}")]
    LengthMismatch { expected: usize, label: String },
    #[error("label {0} appears twice")]
    Collision(String),
    #[error("label {0} is not in Omega")]
    NotOmega(String),
    #[error("not a permutation of Omega: {0}")]
    BadPermutation(String),
    #[error("intermediate label of length {size} exceeds the depth cap {cap}")]
    DepthCapExceeded { size: usize, cap: usize },
    #[error("letter probability must satisfy 0 <= 4p <= 1, got {0}")]
    BadLetterProbability(Q),
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

const X: usize = 0;
const Z: usize = 2;

fn lx() -> Letter {
    Letter::new(X, false)
}

fn lz() -> Letter {
    Letter::new(Z, false)
}

fn letter_char(l: Letter) -> char {
    let c = [b'x', b'y', b'z'][l.generator()] as char;
    if l.is_inverse() { c.to_ascii_uppercase() } else { c }
}

fn char_letter(c: char) -> Option<Letter> {
    let generator = match c.to_ascii_lowercase() {
        'x' => 0,
        'y' => 1,
        'z' => 2,
        _ => return None,
    };
    Some(Letter::new(generator, c.is_ascii_uppercase()))
}

/// A nonempty reduced word over `x, y, z`, naming a cone of the boundary.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConeLabel(Word);

impl ConeLabel {
    pub fn parse(text: &str) -> Result<ConeLabel, CantorError> {
        let letters: Vec<Letter> = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| char_letter(c).ok_or(CantorError::BadCharacter(c)))
            .collect::<Result<_, _>>()?;
        if letters.is_empty() {
            return Err(CantorError::EmptyLabel);
        }
        let n = letters.len();
        let w = Word::reduce(letters);
        if w.len() != n {
            return Err(CantorError::NotReduced(text.to_string()));
        }
        Ok(ConeLabel(w))
    }

    pub fn from_word(w: Word) -> Result<ConeLabel, CantorError> {
        if w.is_empty() {
            return Err(CantorError::EmptyLabel);
        }
        if w.required_rank() > 3 {
            return Err(CantorError::BadCharacter('?'));
        }
        Ok(ConeLabel(w))
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letters(&self) -> &[Letter] {
        self.0.letters()
    }

    fn last(&self) -> Letter {
        self.0.last().expect("labels are nonempty")
    }

    /// Whether every letter is `x^{±1}` or `y^{±1}`.
    pub fn in_f2(&self) -> bool {
        self.letters().iter().all(|l| l.generator() != Z)
    }

    pub fn starts_with(&self, prefix: &ConeLabel) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Whether the two cones meet, i.e. one label is a prefix of the other.
    pub fn meets(&self, other: &ConeLabel) -> bool {
        self.starts_with(other) || other.starts_with(self)
    }

    pub fn prefix(&self, len: usize) -> ConeLabel {
        ConeLabel(self.0.prefix(len))
    }

    fn parent(&self) -> Option<ConeLabel> {
        (self.len() >= 2).then(|| self.prefix(self.len() - 1))
    }

    fn push(&self, l: Letter) -> ConeLabel {
        let mut letters = self.letters().to_vec();
        letters.push(l);
        ConeLabel(Word::reduce(letters))
    }

    /// The five one-letter extensions, in order.
    pub fn children(&self) -> Vec<ConeLabel> {
        allowed_after(self.last()).map(|l| self.push(l)).collect()
    }

    /// A uniformly random label of length `n ≥ 1` containing `z` or `z⁻¹`.
    pub fn random_outside_f2(n: usize, rng: &mut TrialRng) -> ConeLabel {
        assert!(n >= 1);
        loop {
            let mut letters = vec![Letter::from_code(rng.random_range(0..6))];
            while letters.len() < n {
                let prev = *letters.last().unwrap();
                letters.push(letter_at_rank(prev, rng.random_range(0..5)));
            }
            let label = ConeLabel(Word::reduce(letters));
            if !label.in_f2() {
                return label;
            }
        }
    }

    /// `z^{-n}`.
    pub fn pivot(n: usize) -> ConeLabel {
        ConeLabel(Word::letter(lz().inverse()).pow(n as i64))
    }
}

impl fmt::Display for ConeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in self.letters() {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cone({self})")
    }
}

fn all_letters() -> impl Iterator<Item = Letter> + Clone {
    (0..6).map(Letter::from_code)
}

fn allowed_after(prev: Letter) -> impl Iterator<Item = Letter> + Clone {
    all_letters().filter(move |&l| l != prev.inverse())
}

/// Position of `l` among the five letters allowed after `prev`.
#[inline]
fn rank_after(prev: Letter, l: Letter) -> usize {
    let excluded = prev.inverse().code();
    l.code() - (l.code() > excluded) as usize
}

#[inline]
fn letter_at_rank(prev: Letter, rank: usize) -> Letter {
    let excluded = prev.inverse().code();
    Letter::from_code(if rank >= excluded { rank + 1 } else { rank })
}

/// All reduced extensions of `u` by `n` letters, in lexicographic order.
pub fn order_cones(u: &ConeLabel, n: usize) -> Vec<ConeLabel> {
    let mut layer = vec![u.clone()];
    for _ in 0..n {
        layer = layer.iter().flat_map(ConeLabel::children).collect();
    }
    layer
}

/// All labels of length `n`, in lexicographic order.
pub fn labels_of_length(n: usize) -> Vec<ConeLabel> {
    if n == 0 {
        return Vec::new();
    }
    all_letters()
        .flat_map(|l| order_cones(&ConeLabel(Word::letter(l)), n - 1))
        .collect()
}

/// The order-preserving bijection `Cone(u) → Cone(v)` applied to `w`.
pub fn xi(u: &ConeLabel, v: &ConeLabel, w: &ConeLabel) -> Result<ConeLabel, CantorError> {
    if !w.starts_with(u) {
        return Err(CantorError::NotPrefix { u: u.to_string(), w: w.to_string() });
    }
    Ok(xi_unchecked(u, v, w))
}

fn xi_unchecked(u: &ConeLabel, v: &ConeLabel, w: &ConeLabel) -> ConeLabel {
    let mut out = v.letters().to_vec();
    out.reserve(w.len() - u.len());
    let (mut prev_u, mut prev_v) = (u.last(), v.last());
    for &l in &w.letters()[u.len()..] {
        let t = letter_at_rank(prev_v, rank_after(prev_u, l));
        out.push(t);
        prev_u = l;
        prev_v = t;
    }
    ConeLabel(Word::from_reduced(out))
}

/// The 18 length-2 labels containing `z` or `z⁻¹`, sorted.
pub fn omega() -> &'static [ConeLabel] {
    static OMEGA: OnceLock<Vec<ConeLabel>> = OnceLock::new();
    OMEGA.get_or_init(|| labels_of_length(2).into_iter().filter(|l| !l.in_f2()).collect())
}

/// Index of a length-2 label in [`omega`].
pub fn omega_index(label: &ConeLabel) -> Option<usize> {
    if label.len() != 2 {
        return None;
    }
    omega().binary_search(label).ok()
}

/// A permutation of `Ω`, stored as the image index of each element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct S18Perm([u8; 18]);

impl S18Perm {
    pub fn identity() -> S18Perm {
        let mut images = [0u8; 18];
        for (i, x) in images.iter_mut().enumerate() {
            *x = i as u8;
        }
        S18Perm(images)
    }

    pub fn from_images(images: &[usize]) -> Result<S18Perm, CantorError> {
        if images.len() != 18 {
            return Err(CantorError::BadPermutation(format!("{} entries", images.len())));
        }
        let mut seen = [false; 18];
        let mut out = [0u8; 18];
        for (i, &j) in images.iter().enumerate() {
            if j >= 18 || seen[j] {
                return Err(CantorError::BadPermutation(format!("{images:?}")));
            }
            seen[j] = true;
            out[i] = j as u8;
        }
        Ok(S18Perm(out))
    }

    pub fn images(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x as usize).collect()
    }

    fn index_of(label: &ConeLabel) -> Result<usize, CantorError> {
        omega_index(label).ok_or_else(|| CantorError::NotOmega(label.to_string()))
    }

    /// Extends a partial injection on `Ω` to a permutation: unassigned
    /// sources take the unused targets in order.
    pub fn complete(pairs: &[(ConeLabel, ConeLabel)]) -> Result<S18Perm, CantorError> {
        let mut images = [None; 18];
        let mut used = [false; 18];
        for (a, b) in pairs {
            let (i, j) = (S18Perm::index_of(a)?, S18Perm::index_of(b)?);
            match images[i] {
                Some(k) if k != j => return Err(CantorError::Collision(a.to_string())),
                Some(_) => continue,
                None => {}
            }
            if used[j] {
                return Err(CantorError::Collision(b.to_string()));
            }
            images[i] = Some(j);
            used[j] = true;
        }
        let mut free = (0..18).filter(|&j| !used[j]);
        let images: Vec<usize> = images.iter().map(|x| x.unwrap_or_else(|| free.next().unwrap())).collect();
        S18Perm::from_images(&images)
    }

    /// The transposition of two labels of `Ω`.
    pub fn transposition(a: &ConeLabel, b: &ConeLabel) -> Result<S18Perm, CantorError> {
        let (i, j) = (S18Perm::index_of(a)?, S18Perm::index_of(b)?);
        let mut p = S18Perm::identity();
        p.0.swap(i, j);
        Ok(p)
    }

    pub fn is_identity(&self) -> bool {
        *self == S18Perm::identity()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &S18Perm) -> S18Perm {
        let mut out = [0u8; 18];
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.0[other.0[i] as usize];
        }
        S18Perm(out)
    }

    pub fn inverse(&self) -> S18Perm {
        let mut out = [0u8; 18];
        for (i, &j) in self.0.iter().enumerate() {
            out[j as usize] = i as u8;
        }
        S18Perm(out)
    }

    pub fn image(&self, label: &ConeLabel) -> Option<&'static ConeLabel> {
        omega_index(label).map(|i| &omega()[self.0[i] as usize])
    }

    /// Uniformly random, by Fisher–Yates.
    pub fn random(rng: &mut TrialRng) -> S18Perm {
        let mut p = S18Perm::identity();
        for i in (1..18).rev() {
            let j = rng.random_range(0..=i);
            p.0.swap(i, j);
        }
        p
    }
}

impl fmt::Display for S18Perm {
    /// Cycle notation over labels; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("()");
        }
        let mut seen = [false; 18];
        for start in 0..18 {
            if seen[start] || self.0[start] as usize == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(omega()[i].to_string());
                i = self.0[i] as usize;
            }
            write!(f, "({})", cycle.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for S18Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S18Perm{self}")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GLetter {
    /// `x^{±1}` or `y^{±1}`.
    F2(Letter),
    Perm(S18Perm),
}

impl GLetter {
    pub fn inverse(&self) -> GLetter {
        match self {
            GLetter::F2(l) => GLetter::F2(l.inverse()),
            GLetter::Perm(p) => GLetter::Perm(p.inverse()),
        }
    }
}

impl fmt::Display for GLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GLetter::F2(l) => write!(f, "{}", letter_char(*l)),
            GLetter::Perm(p) => write!(f, "{p}"),
        }
    }
}

/// A word over `x^{±1}, y^{±1}` and permutations of `Ω`. It acts on the
/// boundary rightmost letter first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GElement {
    letters: Vec<GLetter>,
}

impl GElement {
    pub fn identity() -> GElement {
        GElement::default()
    }

    pub fn f2(l: Letter) -> GElement {
        assert!(l.generator() < 2, "only x and y act by multiplication");
        GElement { letters: vec![GLetter::F2(l)] }
    }

    pub fn perm(p: S18Perm) -> GElement {
        let mut g = GElement::identity();
        g.push(GLetter::Perm(p));
        g
    }

    pub fn letters(&self) -> &[GLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Appends on the right, cancelling inverse pairs and merging adjacent
    /// permutations.
    pub fn push(&mut self, letter: GLetter) {
        match (self.letters.last().copied(), letter) {
            (_, GLetter::Perm(p)) if p.is_identity() => {}
            (Some(GLetter::F2(a)), GLetter::F2(b)) if a == b.inverse() => {
                self.letters.pop();
            }
            (Some(GLetter::Perm(p)), GLetter::Perm(q)) => {
                self.letters.pop();
                let r = p.compose(&q);
                if !r.is_identity() {
                    self.letters.push(GLetter::Perm(r));
                }
            }
            _ => self.letters.push(letter),
        }
    }

    /// `self·other`: `other` acts first.
    pub fn mul(&self, other: &GElement) -> GElement {
        let mut out = self.clone();
        for &l in &other.letters {
            out.push(l);
        }
        out
    }

    pub fn inverse(&self) -> GElement {
        let mut out = GElement::identity();
        for l in self.letters.iter().rev() {
            out.push(l.inverse());
        }
        out
    }
}

impl fmt::Display for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.letters.iter().map(GLetter::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

/// Result of acting on a single cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied {
    Label(ConeLabel),
    /// The image is not a single cone; split the label into its children.
    NeedsRefinement,
}

#[inline]
fn act(letter: &GLetter, w: &ConeLabel) -> Applied {
    match letter {
        GLetter::F2(a) => {
            if w.letters()[0] == a.inverse() {
                if w.len() == 1 {
                    Applied::NeedsRefinement
                } else {
                    Applied::Label(ConeLabel(Word::from_reduced(w.letters()[1..].to_vec())))
                }
            } else {
                let mut letters = Vec::with_capacity(w.len() + 1);
                letters.push(*a);
                letters.extend_from_slice(w.letters());
                Applied::Label(ConeLabel(Word::from_reduced(letters)))
            }
        }
        GLetter::Perm(p) => {
            if w.len() < 2 {
                return Applied::NeedsRefinement;
            }
            let head = w.prefix(2);
            match omega_index(&head) {
                Some(i) => Applied::Label(xi_unchecked(&head, &omega()[p.0[i] as usize], w)),
                None => Applied::Label(w.clone()),
            }
        }
    }
}

/// The cone `g(Cone(w))`, or a refinement request when some letter does not
/// map the current cone onto a single cone, or when an intermediate label
/// gets shorter than `min_depth`.
pub fn apply(g: &GElement, w: &ConeLabel, min_depth: usize) -> Applied {
    let mut current = w.clone();
    for letter in g.letters.iter().rev() {
        match act(letter, &current) {
            Applied::Label(next) if next.len() >= min_depth.max(1) => current = next,
            _ => return Applied::NeedsRefinement,
        }
    }
    Applied::Label(current)
}

/// A finite union of pairwise disjoint cones, kept normalized: whenever all
/// five children of a label are present they are replaced by the label.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ConeAntichain {
    labels: BTreeSet<ConeLabel>,
}

impl ConeAntichain {
    /// Rejects nested labels.
    pub fn new(labels: impl IntoIterator<Item = ConeLabel>) -> Result<ConeAntichain, CantorError> {
        let labels: Vec<ConeLabel> = labels.into_iter().collect();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                if a.meets(b) {
                    return Err(CantorError::Collision(format!("{a} and {b} overlap")));
                }
            }
        }
        Ok(ConeAntichain::normalized(labels))
    }

    pub fn single(label: ConeLabel) -> ConeAntichain {
        ConeAntichain { labels: BTreeSet::from([label]) }
    }

    /// The whole boundary, as the depth-`d` partition.
    pub fn everything(depth: usize) -> ConeAntichain {
        ConeAntichain::normalized(labels_of_length(depth.max(1)))
    }

    fn normalized(labels: Vec<ConeLabel>) -> ConeAntichain {
        let mut set: BTreeSet<ConeLabel> = labels.into_iter().collect();
        loop {
            let mut counts: HashMap<ConeLabel, usize> = HashMap::new();
            for l in &set {
                if let Some(p) = l.parent() {
                    *counts.entry(p).or_insert(0) += 1;
                }
            }
            let full: Vec<ConeLabel> = counts.into_iter().filter(|(_, c)| *c == 5).map(|(p, _)| p).collect();
            if full.is_empty() {
                break;
            }
            for p in full {
                for c in p.children() {
                    set.remove(&c);
                }
                set.insert(p);
            }
        }
        ConeAntichain { labels: set }
    }

    pub fn labels(&self) -> &BTreeSet<ConeLabel> {
        &self.labels
    }

    /// Whether the union meets `Cone(target)`.
    pub fn meets(&self, target: &ConeLabel) -> bool {
        self.labels.iter().any(|l| l.meets(target))
    }

    /// Whether every point of `Cone(w)` lies in the union.
    pub fn covers(&self, w: &ConeLabel) -> bool {
        self.labels.iter().any(|l| w.starts_with(l))
    }
}

impl fmt::Display for ConeAntichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(ConeLabel::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `g(A)`, splitting labels into children whenever a letter asks for it.
pub fn image_antichain(g: &GElement, a: &ConeAntichain, depth_cap: usize) -> Result<ConeAntichain, CantorError> {
    let mut labels: Vec<ConeLabel> = a.labels.iter().cloned().collect();
    for letter in g.letters.iter().rev() {
        let mut out = Vec::with_capacity(labels.len());
        let mut stack = labels;
        while let Some(w) = stack.pop() {
            match act(letter, &w) {
                Applied::Label(x) => {
                    if x.len() > depth_cap {
                        return Err(CantorError::DepthCapExceeded { size: x.len(), cap: depth_cap });
                    }
                    out.push(x);
                }
                Applied::NeedsRefinement => {
                    if w.len() + 1 > depth_cap {
                        return Err(CantorError::DepthCapExceeded { size: w.len() + 1, cap: depth_cap });
                    }
                    stack.extend(w.children());
                }
            }
        }
        labels = ConeAntichain::normalized(out).labels.into_iter().collect();
    }
    Ok(ConeAntichain::normalized(labels))
}

/// Whether `g(Cone(from)) = Cone(to)` exactly.
pub fn sends_cone(g: &GElement, from: &ConeLabel, to: &ConeLabel, depth_cap: usize) -> Result<bool, CantorError> {
    Ok(image_antichain(g, &ConeAntichain::single(from.clone()), depth_cap)? == ConeAntichain::single(to.clone()))
}

fn check_claim_label(u: &ConeLabel) -> Result<usize, CantorError> {
    let n = u.len();
    if n < 2 {
        return Err(CantorError::TooShort(n));
    }
    if u.in_f2() {
        return Err(CantorError::InsideF2(u.to_string()));
    }
    Ok(n)
}

fn zz() -> ConeLabel {
    ConeLabel(Word::letter(lz()).pow(2))
}

fn big_zz() -> ConeLabel {
    ConeLabel::pivot(2)
}

/// An element `f` with `f(Cone(u)) = Cone(z²)` and
/// `f(Cone(z^{-n})) = Cone(z^{-2})`, for `|u| = n ≥ 2`, `u ∉ F(x, y)` and
/// `u ≠ z^{-n}`.
pub fn claim1_f(u: &ConeLabel) -> Result<GElement, CantorError> {
    let n = check_claim_label(u)?;
    if *u == ConeLabel::pivot(n) {
        return Err(CantorError::PivotLabel(u.to_string()));
    }
    if n == 2 {
        return Ok(GElement::perm(S18Perm::transposition(u, &zz())?));
    }
    let head = u.prefix(2);
    let (a, sigma) = if head.in_f2() {
        // The leading letter a is in F₂; peel it off.
        let a = u.letters()[0];
        let az = ConeLabel(Word::reduce([a, lz().inverse()]));
        (a, S18Perm::transposition(&big_zz(), &az)?)
    } else if head == big_zz() {
        let xz = ConeLabel(Word::reduce([lx(), lz().inverse()]));
        (lx(), S18Perm::transposition(&big_zz(), &xz)?)
    } else {
        let xz = ConeLabel(Word::reduce([lx(), lz()]));
        let x_z = ConeLabel(Word::reduce([lx(), lz().inverse()]));
        (lx(), S18Perm::complete(&[(head.clone(), xz), (big_zz(), x_z)])?)
    };
    let mut step = GElement::f2(a.inverse());
    step.push(GLetter::Perm(sigma));
    let shorter = match apply(&step, u, 0) {
        Applied::Label(l) => l,
        Applied::NeedsRefinement => unreachable!("labels of length at least 3 map to cones"),
    };
    debug_assert_eq!(shorter.len(), n - 1);
    Ok(claim1_f(&shorter)?.mul(&step))
}

/// An element swapping `Cone(u)` with `Cone(z^{-n})` and fixing every
/// other cone of depth `n` pointwise: `f⁻¹·τ·f` with `τ` the transposition
/// of `z²` and `z^{-2}`.
pub fn claim2_g(u: &ConeLabel) -> Result<GElement, CantorError> {
    let n = check_claim_label(u)?;
    if *u == ConeLabel::pivot(n) {
        return Ok(GElement::identity());
    }
    let f = claim1_f(u)?;
    let tau = GElement::perm(S18Perm::transposition(&zz(), &big_zz())?);
    Ok(f.inverse().mul(&tau).mul(&f))
}

/// An element sending `Cone(u_i)` onto `Cone(v_i)` for every pair.
///
/// The pairs are completed to a permutation of the labels involved, each
/// cycle is split into transpositions through its first element, and a
/// transposition `(a b)` avoiding the pivot `p = z^{-n}` is realised as
/// `(a p)(b p)(a p)`. The result is verified before it is returned.
pub fn claim3_witness(pairs: &[(ConeLabel, ConeLabel)], n: usize) -> Result<GElement, CantorError> {
    if n < 2 {
        return Err(CantorError::TooShort(n));
    }
    for (u, v) in pairs {
        for l in [u, v] {
            if l.len() != n {
                return Err(CantorError::LengthMismatch { expected: n, label: l.to_string() });
            }
            check_claim_label(l)?;
        }
    }
    let mut map: BTreeMap<ConeLabel, ConeLabel> = BTreeMap::new();
    let mut targets = BTreeSet::new();
    for (u, v) in pairs {
        if map.insert(u.clone(), v.clone()).is_some() {
            return Err(CantorError::Collision(u.to_string()));
        }
        if !targets.insert(v.clone()) {
            return Err(CantorError::Collision(v.to_string()));
        }
    }
    // Complete the partial injection on U ∪ V to a permutation.
    let sources: BTreeSet<ConeLabel> = map.keys().cloned().collect();
    let unmapped: Vec<ConeLabel> = targets.difference(&sources).cloned().collect();
    let unused: Vec<ConeLabel> = sources.difference(&targets).cloned().collect();
    for (a, b) in unmapped.into_iter().zip(unused) {
        map.insert(a, b);
    }
    let pivot = ConeLabel::pivot(n);
    let swap_with_pivot = |u: &ConeLabel| claim2_g(u);
    let transposition = |a: &ConeLabel, b: &ConeLabel| -> Result<GElement, CantorError> {
        if *a == pivot {
            swap_with_pivot(b)
        } else if *b == pivot {
            swap_with_pivot(a)
        } else {
            let ga = swap_with_pivot(a)?;
            Ok(ga.mul(&swap_with_pivot(b)?).mul(&ga))
        }
    };
    let mut g = GElement::identity();
    let mut done = BTreeSet::new();
    for start in map.keys() {
        if done.contains(start) {
            continue;
        }
        let mut cycle = vec![start.clone()];
        done.insert(start.clone());
        let mut next = &map[start];
        while next != start {
            done.insert(next.clone());
            cycle.push(next.clone());
            next = &map[next];
        }
        // (c1 c2 … cj) = (c1 cj)∘…∘(c1 c2), with (c1 c2) acting first.
        for c in &cycle[1..] {
            g = transposition(&cycle[0], c)?.mul(&g);
        }
    }
    for (u, v) in pairs {
        if !sends_cone(&g, u, v, n + 64)? {
            return Err(CantorError::VerificationFailed(format!("{u} is not sent to {v}")));
        }
    }
    Ok(g)
}

/// Roots of `q = 1/4 + (3/4)q²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HitProbability {
    pub minimal: Q,
    pub roots: (Q, Q),
}

/// Probability that the simple random walk on `F(x, y)` ever visits `x`:
/// the least root of `3q² − 4q + 1 = 0`, found exactly. Holding steps do
/// not change hitting probabilities.
pub fn hit_probability_exact() -> HitProbability {
    let (a, b, c) = (3i64, -4i64, 1i64);
    let disc = b * b - 4 * a * c;
    let root = disc.sqrt();
    assert_eq!(root * root, disc, "the discriminant is a perfect square");
    let r1 = Q::new(-b - root, 2 * a);
    let r2 = Q::new(-b + root, 2 * a);
    HitProbability { minimal: r1.min(r2), roots: (r1.min(r2), r1.max(r2)) }
}

/// `|A| = 18! + 4`.
pub fn alphabet_size() -> BigInt {
    (1..=18u32).fold(BigInt::one(), |acc, k| acc * k) + 4
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperharmonicReport {
    pub radius: usize,
    pub vertices: usize,
    pub equality_off_origin: bool,
    pub strict_at_origin: bool,
}

impl SuperharmonicReport {
    pub fn holds(&self) -> bool {
        self.equality_off_origin && self.strict_at_origin
    }
}

/// Checks `Σ_g ν(g) f(vg) ≤ f(v)` exactly for `f(v) = 3^{-|v|}` at every
/// `v ∈ F(x, y)` with `|v| ≤ radius`, where `ν` gives mass `1/|A|` to each
/// of `x^{±1}, y^{±1}` and holds otherwise.
pub fn superharmonic_check(radius: usize) -> SuperharmonicReport {
    let size = alphabet_size();
    let letter_mass = BigRational::new(BigInt::one(), size.clone());
    let hold = BigRational::one() - &letter_mass * BigRational::from_integer(BigInt::from(4));
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let f = |len: usize| -> BigRational {
        BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(3), len))
    };
    let group = crate::freegroup::FreeGroup::new(2).expect("rank 2");
    let mut equality = true;
    let mut strict = true;
    let mut vertices = 0;
    for v in group.ball(radius.max(1)) {
        vertices += 1;
        let fv = f(v.len());
        let mut total = &hold * &fv;
        for l in group.letters() {
            total += &letter_mass * f(v.mul(&Word::letter(l)).len());
        }
        if v.is_identity() {
            strict &= total < fv;
        } else {
            equality &= total == fv;
        }
    }
    debug_assert!(third.is_positive());
    SuperharmonicReport { radius, vertices, equality_off_origin: equality, strict_at_origin: strict }
}

/// Monte Carlo estimate of `q_n = P(w_n(Cone(z)) ∩ Cone(x²) ≠ ∅)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QnEstimate {
    pub p_letter: Q,
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    /// Trials abandoned because a label outgrew the depth cap; they count
    /// neither as hits nor as misses.
    pub cap_exceeded: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl QnEstimate {
    pub fn sigma(&self) -> f64 {
        stats::proportion_sigma(self.p_hat, (self.trials - self.cap_exceeded) as u64)
    }
}

/// One step: each of `x^{±1}, y^{±1}` with probability `p_letter`, and a
/// uniformly random permutation of `Ω` otherwise.
fn draw_step(p_letter: Q, rng: &mut TrialRng) -> GLetter {
    let (num, den) = (*p_letter.numer() as u64, *p_letter.denom() as u64);
    let u = rng.random_range(0..den);
    if u < 4 * num {
        let code = (u / num) as usize;
        GLetter::F2(Letter::from_code(code))
    } else {
        GLetter::Perm(S18Perm::random(rng))
    }
}

pub fn estimate_qn(p_letter: Q, n: usize, trials: usize, depth_cap: usize, seed: u64) -> Result<QnEstimate, CantorError> {
    if p_letter < Q::from_integer(0) || p_letter * 4 > Q::from_integer(1) {
        return Err(CantorError::BadLetterProbability(p_letter));
    }
    if trials == 0 {
        return Err(CantorError::ZeroTrials);
    }
    let start = ConeAntichain::single(ConeLabel(Word::letter(lz())));
    let target = ConeLabel(Word::letter(lx()).pow(2));
    let outcomes: Vec<Option<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::substream(seed, t as u64);
            let mut g = GElement::identity();
            for _ in 0..n {
                g.push(draw_step(p_letter, &mut r));
            }
            image_antichain(&g, &start, depth_cap).ok().map(|image| image.meets(&target))
        })
        .collect();
    let cap_exceeded = outcomes.iter().filter(|o| o.is_none()).count();
    let successes = outcomes.iter().filter(|o| **o == Some(true)).count();
    let ci = stats::proportion(successes as u64, (trials - cap_exceeded) as u64);
    Ok(QnEstimate {
        p_letter,
        n,
        trials,
        successes,
        cap_exceeded,
        p_hat: ci.estimate,
        ci_low: ci.low,
        ci_high: ci.high,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HittingEstimate {
    pub trials: usize,
    pub horizon: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Fraction of simple random walks on `F(x, y)` that visit `x` within
/// `horizon` steps. Steps use two bits each of a 64-bit draw.
pub fn hitting_estimate(trials: usize, horizon: usize, seed: u64) -> HittingEstimate {
    let hits: usize = (0..trials)
        .into_par_iter()
        .map_init(Vec::<u8>::new, |stack, t| {
            let mut r = rng::substream(seed, t as u64);
            stack.clear();
            let mut bits = 0u64;
            for step in 0..horizon {
                if step % 32 == 0 {
                    bits = r.random::<u64>();
                }
                let code = (bits & 3) as u8;
                bits >>= 2;
                if stack.last() == Some(&(code ^ 1)) {
                    stack.pop();
                } else {
                    stack.push(code);
                }
                if stack.len() == 1 && stack[0] == 0 {
                    return 1;
                }
            }
            0
        })
        .sum();
    let ci = stats::proportion(hits as u64, trials as u64);
    HittingEstimate { trials, horizon, hits, p_hat: ci.estimate, ci_low: ci.low, ci_high: ci.high, seed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> ConeLabel {
        ConeLabel::parse(s).unwrap()
    }

    fn strings(v: &[ConeLabel]) -> Vec<String> {
        v.iter().map(ConeLabel::to_string).collect()
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(strings(&order_cones(&c("zx"), 1)), ["zxx", "zxy", "zxY", "zxz", "zxZ"]);
        assert_eq!(strings(&order_cones(&c("z"), 1)), ["zx", "zX", "zy", "zY", "zz"]);
        assert_eq!(order_cones(&c("xyZ"), 0), vec![c("xyZ")]);
        assert_eq!(omega().len(), 18);
        assert_eq!(labels_of_length(2).len(), 30);
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi(&c("zx"), &c("zy"), &c("zxx")).unwrap(), c("zyx"));
        assert_eq!(xi(&c("zx"), &c("zy"), &c("zxy")).unwrap(), c("zyX"));
        assert_eq!(xi(&c("yz"), &c("yz"), &c("yzXy")).unwrap(), c("yzXy"));
        assert!(matches!(xi(&c("zx"), &c("zy"), &c("zy")), Err(CantorError::NotPrefix { .. })));
    }

    #[test]
    fn apply_examples() {
        let x = GElement::f2(lx());
        assert_eq!(apply(&x, &c("zx"), 0), Applied::Label(c("xzx")));
        assert_eq!(apply(&x, &c("Xz"), 0), Applied::Label(c("z")));
        assert_eq!(apply(&x, &c("X"), 0), Applied::NeedsRefinement);
        let sigma = GElement::perm(S18Perm::transposition(&c("zx"), &c("zy")).unwrap());
        assert_eq!(apply(&sigma, &c("zxx"), 0), Applied::Label(c("zyx")));
        assert_eq!(apply(&sigma, &c("z"), 0), Applied::NeedsRefinement);
        assert_eq!(apply(&sigma, &c("xyz"), 0), Applied::Label(c("xyz")));
    }

    #[test]
    fn antichain_examples() {
        let sigma = GElement::perm(S18Perm::complete(&[(c("zx"), c("Zy")), (c("xz"), c("zz"))]).unwrap());
        let all = ConeAntichain::everything(2);
        assert_eq!(image_antichain(&sigma, &all, 8).unwrap(), all);
        assert_eq!(all, ConeAntichain::everything(1));
        let x = GElement::f2(lx());
        let image = image_antichain(&x, &ConeAntichain::single(c("X")), 8).unwrap();
        assert_eq!(image.to_string(), "{X, y, Y, z, Z}");
        // Pointwise at depth 3: a point lies in the image iff it does not start with x.
        for w in labels_of_length(3) {
            assert_eq!(image.covers(&w), w.letters()[0] != lx(), "{w}");
        }
        let a = ConeAntichain::new([c("zx"), c("yy")]).unwrap();
        assert_eq!(image_antichain(&GElement::identity(), &a, 8).unwrap(), a);
        assert!(ConeAntichain::new([c("zx"), c("zxy")]).is_err());
    }

    #[test]
    fn depth_cap_is_reported() {
        let g = GElement::f2(lx()).mul(&GElement::f2(lx()));
        let err = image_antichain(&g, &ConeAntichain::single(c("zzz")), 4).unwrap_err();
        assert_eq!(err, CantorError::DepthCapExceeded { size: 5, cap: 4 });
    }

    #[test]
    fn claim1_examples() {
        for u in ["zx", "zz", "xzx", "Zxz", "ZZy", "yxYz", "Zxz", "XZZZ"] {
            let u = c(u);
            let f = claim1_f(&u).unwrap();
            let n = u.len();
            assert!(sends_cone(&f, &u, &zz(), n + 8).unwrap(), "{u}: {f}");
            assert!(sends_cone(&f, &ConeLabel::pivot(n), &big_zz(), n + 8).unwrap(), "{u}: {f}");
        }
        assert_eq!(claim1_f(&c("zx")).unwrap().len(), 1);
        assert!(matches!(claim1_f(&c("xy")), Err(CantorError::InsideF2(_))));
        assert!(matches!(claim1_f(&c("ZZZ")), Err(CantorError::PivotLabel(_))));
        assert!(matches!(claim1_f(&c("z")), Err(CantorError::TooShort(1))));
    }

    #[test]
    fn claim2_examples() {
        assert_eq!(claim2_g(&c("ZZZ")).unwrap(), GElement::identity());
        let g = claim2_g(&c("zx")).unwrap();
        assert!(sends_cone(&g, &c("zx"), &c("ZZ"), 8).unwrap());
        assert!(sends_cone(&g, &c("ZZ"), &c("zx"), 8).unwrap());
        assert!(sends_cone(&g, &c("yzyzy"), &c("yzyzy"), 12).unwrap());
    }

    #[test]
    fn claim3_examples() {
        let g = claim3_witness(&[(c("zx"), c("Xz"))], 2).unwrap();
        assert!(sends_cone(&g, &c("zx"), &c("Xz"), 8).unwrap());
        assert!(sends_cone(&g, &c("Xz"), &c("zx"), 8).unwrap());
        assert_eq!(claim3_witness(&[(c("zx"), c("zx"))], 2).unwrap(), GElement::identity());
        let pairs = [(c("zxy"), c("ZZZ")), (c("ZZZ"), c("yzx")), (c("Yzz"), c("zxy"))];
        claim3_witness(&pairs, 3).unwrap();
        assert!(matches!(claim3_witness(&[(c("zx"), c("zy")), (c("zx"), c("zz"))], 2), Err(CantorError::Collision(_))));
        assert!(matches!(claim3_witness(&[(c("xy"), c("zy"))], 2), Err(CantorError::InsideF2(_))));
    }

    #[test]
    fn hitting_constants() {
        let h = hit_probability_exact();
        assert_eq!(h.minimal, Q::new(1, 3));
        assert_eq!(h.roots, (Q::new(1, 3), Q::from_integer(1)));
        assert!((crate::oracle::hit_probability_iteration(2000) - 1.0 / 3.0).abs() < 1e-3);
        let r = superharmonic_check(1);
        assert!(r.holds());
        assert_eq!(r.vertices, 5);
        assert_eq!(superharmonic_check(3).holds(), r.holds());
    }

    #[test]
    fn qn_edge_cases() {
        let q = estimate_qn(Q::new(1, 8), 0, 100, 64, 1).unwrap();
        assert_eq!(q.successes, 0);
        assert!(matches!(estimate_qn(Q::new(1, 3), 5, 10, 64, 1), Err(CantorError::BadLetterProbability(_))));
    }

    #[test]
    fn permutation_algebra() {
        let mut r = rng::substream(3, 0);
        let p = S18Perm::random(&mut r);
        let q = S18Perm::random(&mut r);
        assert!(p.compose(&p.inverse()).is_identity());
        assert_eq!(p.compose(&q).inverse(), q.inverse().compose(&p.inverse()));
        assert_eq!(S18Perm::from_images(&p.images()).unwrap(), p);
        assert_eq!(S18Perm::transposition(&c("zx"), &c("zz")).unwrap().to_string(), "(zx zz)");
        // The action is a homomorphism on cones of depth at least 2.
        let (gp, gq) = (GElement::perm(p), GElement::perm(q));
        let mut pq = GElement::perm(p);
        pq.push(GLetter::Perm(q));
        assert_eq!(pq.len(), 1);
        for w in labels_of_length(3) {
            assert_eq!(apply(&pq, &w, 0), apply(&gp.mul(&gq), &w, 0));
        }
    }
}
