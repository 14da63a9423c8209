//! Reference implementations that share no code path with the engines they
//! check. They are slow and only meant for small inputs; the self-test driver
//! and the test suites compare the engines against them.

use std::collections::BTreeSet;

use rand::Rng;

use crate::freegroup::{FreeGroup, Letter, Word};
use crate::rng;
use crate::stallings::SubgroupAutomaton;

/// Membership in `⟨gens⟩` by ε-saturation of the unfolded bouquet of
/// generator loops: a path spelling `x·(cancelling word)·x⁻¹` gets an
/// ε-shortcut until nothing changes, after which a reduced word belongs to
/// the subgroup iff the saturated automaton accepts it from the base back to
/// the base.
pub struct BouquetOracle {
    vertices: usize,
    /// `(src, letter code, dst)`, both orientations.
    edges: Vec<(usize, usize, usize)>,
    eps: Vec<Vec<bool>>,
}

impl BouquetOracle {
    pub fn new(gens: &[Word]) -> BouquetOracle {
        let mut vertices = 1;
        let mut edges = Vec::new();
        for g in gens.iter().filter(|g| !g.is_identity()) {
            let n = g.len();
            let mut prev = 0;
            for (i, l) in g.letters().iter().enumerate() {
                let next = if i + 1 == n {
                    0
                } else {
                    vertices += 1;
                    vertices - 1
                };
                edges.push((prev, l.code(), next));
                edges.push((next, l.inverse().code(), prev));
                prev = next;
            }
        }
        let mut eps = vec![vec![false; vertices]; vertices];
        for (v, row) in eps.iter_mut().enumerate() {
            row[v] = true;
        }
        let mut oracle = BouquetOracle { vertices, edges, eps };
        oracle.saturate();
        oracle
    }

    fn saturate(&mut self) {
        loop {
            let mut changed = false;
            for &(p, l, q) in &self.edges {
                for q2 in 0..self.vertices {
                    if !self.eps[q][q2] {
                        continue;
                    }
                    for &(s, l2, r) in &self.edges {
                        if s == q2 && l2 == (l ^ 1) && !self.eps[p][r] {
                            self.eps[p][r] = true;
                            changed = true;
                        }
                    }
                }
            }
            // Transitive closure.
            for k in 0..self.vertices {
                for i in 0..self.vertices {
                    if !self.eps[i][k] {
                        continue;
                    }
                    for j in 0..self.vertices {
                        if self.eps[k][j] && !self.eps[i][j] {
                            self.eps[i][j] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn close(&self, set: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.vertices];
        for (p, _) in set.iter().enumerate().filter(|(_, &b)| b) {
            for (q, o) in out.iter_mut().enumerate() {
                *o |= self.eps[p][q];
            }
        }
        out
    }

    pub fn contains(&self, w: &Word) -> bool {
        let mut start = vec![false; self.vertices];
        start[0] = true;
        let mut current = self.close(&start);
        for l in w.letters() {
            let mut next = vec![false; self.vertices];
            for &(p, code, q) in &self.edges {
                if code == l.code() && current[p] {
                    next[q] = true;
                }
            }
            current = self.close(&next);
        }
        current[0]
    }
}

/// Reduced products of at most `max_factors` generators or inverses whose
/// length is at most `max_len`. Every word returned lies in the subgroup.
pub fn bounded_products(gens: &[Word], max_factors: usize, max_len: usize) -> BTreeSet<Word> {
    let symbols: Vec<Word> = gens
        .iter()
        .filter(|g| !g.is_identity())
        .flat_map(|g| [g.clone(), g.inverse()])
        .collect();
    let mut seen = BTreeSet::from([Word::identity()]);
    let mut layer = vec![Word::identity()];
    for _ in 0..max_factors {
        let mut next = Vec::new();
        for w in &layer {
            for s in &symbols {
                next.push(w.mul(s));
            }
        }
        next.sort();
        next.dedup();
        seen.extend(next.iter().filter(|w| w.len() <= max_len).cloned());
        layer = next;
    }
    seen
}

/// Smallest `m ≤ m_max` and shortlex-first `v` with `|v| ≤ radius` such that
/// `v⁻¹fᵐv ∈ H`, by exhaustive search.
pub fn power_conjugate_search(
    h: &SubgroupAutomaton,
    f: &Word,
    m_max: u32,
    radius: usize,
) -> Option<(u32, Word)> {
    let group = h.group();
    let conjugators = group.ball(radius);
    let mut power = Word::identity();
    for m in 1..=m_max {
        power = power.mul(f);
        for v in &conjugators {
            if h.contains(&v.inverse().mul(&power).mul(v)) {
                return Some((m, v.clone()));
            }
        }
    }
    None
}

/// Simulates the word length `|w_n|` of the simple random walk on `F_k`
/// directly as a walk on `{0, 1, 2, …}`: from 0 it always steps to 1,
/// elsewhere it steps up with probability `(2k−1)/2k`. Returns the mean of
/// `|w_n|/n` over the trials.
pub fn reflected_length_speed(k: usize, n: usize, trials: usize, seed: u64) -> f64 {
    let mut total = 0.0;
    for t in 0..trials {
        let mut r = rng::substream(seed ^ 0x5eed_0f_1e46, t as u64);
        let mut len: u64 = 0;
        for _ in 0..n {
            if len == 0 || r.random_range(0..2 * k) != 0 {
                len += 1;
            } else {
                len -= 1;
            }
        }
        total += len as f64 / n as f64;
    }
    total / trials as f64
}

/// `q_{t+1} = 1/4 + (3/4)q_t²` from `q_0 = 0`.
pub fn hit_probability_iteration(iterations: usize) -> f64 {
    (0..iterations).fold(0.0, |q, _| 0.25 + 0.75 * q * q)
}

/// The distribution of `w_n` by explicitly enumerating all `|support|ⁿ`
/// increment sequences, with floating-point weights.
pub fn enumerate_walk(support: &[(Word, f64)], n: usize) -> Vec<(Word, f64)> {
    let mut out: std::collections::BTreeMap<Word, f64> = std::collections::BTreeMap::new();
    let m = support.len();
    let total = m.pow(n as u32);
    for mut index in 0..total {
        let mut w = Word::identity();
        let mut p = 1.0;
        for _ in 0..n {
            let (g, q) = &support[index % m];
            index /= m;
            w = w.mul(g);
            p *= q;
        }
        *out.entry(w).or_insert(0.0) += p;
    }
    out.into_iter().collect()
}

/// All nonempty folded core graphs with at most `max_states` states over
/// `F_2`, one per subgroup, obtained from every pair of partial injections
/// labelled `a` and `b`.
pub fn small_subgroups(max_states: usize) -> Vec<SubgroupAutomaton> {
    let group = FreeGroup::new(2).expect("rank 2");
    let mut found = BTreeSet::new();
    let mut out = Vec::new();
    for n in 1..=max_states {
        let injections = partial_injections(n);
        for pa in &injections {
            for pb in &injections {
                let mut edges = Vec::new();
                for (src, dst) in pa.iter().enumerate() {
                    if let Some(dst) = dst {
                        edges.push((src, Letter::new(0, false), *dst));
                    }
                }
                for (src, dst) in pb.iter().enumerate() {
                    if let Some(dst) = dst {
                        edges.push((src, Letter::new(1, false), *dst));
                    }
                }
                let h = SubgroupAutomaton::from_edges(&group, n, &edges).expect("valid edges");
                if found.insert(h.to_text()) {
                    out.push(h);
                }
            }
        }
    }
    out
}

fn partial_injections(n: usize) -> Vec<Vec<Option<usize>>> {
    fn extend(i: usize, n: usize, used: &mut Vec<bool>, current: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == n {
            out.push(current.clone());
            return;
        }
        current.push(None);
        extend(i + 1, n, used, current, out);
        current.pop();
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                current.push(Some(j));
                extend(i + 1, n, used, current, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(0, n, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}
