//! Finitely generated subgroups of `F_k` as folded Stallings core graphs.
//!
//! A [`SubgroupAutomaton`] is kept in canonical form: the core graph is
//! numbered by breadth-first search from the base state (state 0), visiting
//! letters in the order `a, A, b, B, …`. Two automata are equal exactly when
//! they represent the same subgroup.
//!
//! The hull of the orbit `H(1)` in the Cayley tree is the image of the
//! universal cover of the core graph, so orbit distances reduce to reading a
//! word as far as possible and then walking back to the base state.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::freegroup::{FreeGroup, FreeGroupError, Letter, Word};

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StallingsError {
    #[error("automata over different ranks: {left} and {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("the element must be nontrivial")]
    IdentityElement,
    #[error("automaton text, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

/// Index of a subgroup in `F_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Finite(usize),
    Infinite,
}

impl Index {
    pub fn is_finite(self) -> bool {
        matches!(self, Index::Finite(_))
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => f.write_str("inf"),
        }
    }
}

/// Union-find folding of a labeled graph.
struct Folder {
    alphabet: usize,
    parent: Vec<usize>,
    size: Vec<usize>,
    edges: Vec<Vec<u32>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new(alphabet: usize) -> Folder {
        Folder { alphabet, parent: Vec::new(), size: Vec::new(), edges: Vec::new(), pending: Vec::new() }
    }

    fn add_vertex(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.size.push(1);
        self.edges.push(vec![NONE; self.alphabet]);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn set(&mut self, p: usize, l: usize, q: usize) {
        let p = self.find(p);
        match self.edges[p][l] {
            NONE => self.edges[p][l] = q as u32,
            r => self.pending.push((r as usize, q)),
        }
    }

    /// Adds `p --l--> q` together with its reverse and folds to completion.
    fn add_edge(&mut self, p: usize, l: Letter, q: usize) {
        self.set(p, l.code(), q);
        self.set(q, l.inverse().code(), p);
        while let Some((x, y)) = self.pending.pop() {
            self.merge(x, y);
        }
    }

    fn merge(&mut self, x: usize, y: usize) {
        let (mut x, mut y) = (self.find(x), self.find(y));
        if x == y {
            return;
        }
        if self.size[x] < self.size[y] {
            std::mem::swap(&mut x, &mut y);
        }
        self.parent[y] = x;
        self.size[x] += self.size[y];
        let moved = std::mem::take(&mut self.edges[y]);
        for (l, &t) in moved.iter().enumerate() {
            if t == NONE {
                continue;
            }
            match self.edges[x][l] {
                NONE => self.edges[x][l] = t,
                t2 => self.pending.push((t as usize, t2 as usize)),
            }
        }
    }

    fn add_loop_word(&mut self, base: usize, w: &Word) {
        let letters = w.letters();
        let mut current = base;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() { base } else { self.add_vertex() };
            self.add_edge(current, l, next);
            current = next;
        }
    }

    /// Resolves the folded graph, prunes it to its core relative to `base`
    /// and renumbers it canonically.
    fn finish(mut self, rank: usize, base: usize) -> SubgroupAutomaton {
        let alphabet = self.alphabet;
        let base = self.find(base);
        let n = self.parent.len();
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut alive = vec![false; n];
        for v in 0..n {
            if self.find(v) != v {
                continue;
            }
            alive[v] = true;
            let row: Vec<u32> = (0..alphabet)
                .map(|l| match self.edges[v][l] {
                    NONE => NONE,
                    t => self.find(t as usize) as u32,
                })
                .collect();
            adjacency[v] = row;
        }
        // Strip hanging trees: non-base vertices of degree at most one.
        let mut degree: Vec<usize> = (0..n)
            .map(|v| if alive[v] { adjacency[v].iter().filter(|&&t| t != NONE).count() } else { 0 })
            .collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| alive[v] && v != base && degree[v] <= 1).collect();
        while let Some(v) = queue.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for l in 0..alphabet {
                let t = adjacency[v][l];
                if t == NONE {
                    continue;
                }
                let t = t as usize;
                adjacency[v][l] = NONE;
                let back = l ^ 1;
                if adjacency[t][back] as usize == v {
                    adjacency[t][back] = NONE;
                    degree[t] -= 1;
                    if t != base && alive[t] && degree[t] <= 1 {
                        queue.push(t);
                    }
                }
            }
        }
        SubgroupAutomaton::canonical_from(rank, base, &adjacency)
    }
}

/// A folded core graph with base state 0 representing a finitely generated
/// subgroup `H ≤ F_k`: the base-to-base loops spell exactly the elements
/// of `H`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubgroupAutomaton {
    rank: usize,
    states: usize,
    /// `transitions[state * 2k + letter]`, or `NONE`.
    transitions: Vec<u32>,
    /// Graph distance of each state from the base.
    depth: Vec<u32>,
}

impl SubgroupAutomaton {
    fn canonical_from(rank: usize, base: usize, adjacency: &[Vec<u32>]) -> SubgroupAutomaton {
        let alphabet = 2 * rank;
        let mut number = vec![NONE; adjacency.len()];
        let mut order = vec![base];
        number[base] = 0;
        let mut depth = vec![0u32];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for l in 0..alphabet {
                let t = adjacency[v][l];
                if t != NONE && number[t as usize] == NONE {
                    number[t as usize] = order.len() as u32;
                    depth.push(depth[number[v] as usize] + 1);
                    order.push(t as usize);
                }
            }
        }
        let mut transitions = vec![NONE; order.len() * alphabet];
        for (i, &v) in order.iter().enumerate() {
            for l in 0..alphabet {
                let t = adjacency[v][l];
                if t != NONE {
                    transitions[i * alphabet + l] = number[t as usize];
                }
            }
        }
        SubgroupAutomaton { rank, states: order.len(), transitions, depth }
    }

    /// The automaton of `⟨gens⟩`. Identity generators are ignored.
    pub fn from_generators(group: &FreeGroup, gens: &[Word]) -> Result<SubgroupAutomaton, StallingsError> {
        for g in gens {
            group.check(g)?;
        }
        let mut folder = Folder::new(group.alphabet_size());
        let base = folder.add_vertex();
        for g in gens.iter().filter(|g| !g.is_identity()) {
            folder.add_loop_word(base, g);
        }
        Ok(folder.finish(group.rank(), base))
    }

    pub fn trivial(group: &FreeGroup) -> SubgroupAutomaton {
        SubgroupAutomaton::from_generators(group, &[]).expect("no generators to check")
    }

    /// The whole group, `F_k` itself.
    pub fn whole(group: &FreeGroup) -> SubgroupAutomaton {
        let gens: Vec<Word> = (0..group.rank()).map(|i| group.generator(i).unwrap()).collect();
        SubgroupAutomaton::from_generators(group, &gens).unwrap()
    }

    /// Builds an automaton from explicit edges `(src, letter, dst)` on
    /// `states` states with base 0, folding and pruning as needed.
    pub fn from_edges(
        group: &FreeGroup,
        states: usize,
        edges: &[(usize, Letter, usize)],
    ) -> Result<SubgroupAutomaton, StallingsError> {
        let mut folder = Folder::new(group.alphabet_size());
        for _ in 0..states.max(1) {
            folder.add_vertex();
        }
        for (i, &(p, l, q)) in edges.iter().enumerate() {
            if p >= states || q >= states {
                return Err(StallingsError::Parse { line: i, message: format!("state out of range in edge {p} {q}") });
            }
            if l.generator() >= group.rank() {
                return Err(FreeGroupError::GeneratorOutOfRange { index: l.generator(), rank: group.rank() }.into());
            }
            folder.add_edge(p, l, q);
        }
        Ok(folder.finish(group.rank(), 0))
    }

    pub fn group(&self) -> FreeGroup {
        FreeGroup::new(self.rank).expect("rank validated at construction")
    }

    pub fn rank_of_group(&self) -> usize {
        self.rank
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    /// Number of (undirected) edges.
    pub fn num_edges(&self) -> usize {
        self.transitions.iter().filter(|&&t| t != NONE).count() / 2
    }

    #[inline]
    pub fn transition(&self, state: usize, l: Letter) -> Option<usize> {
        let code = l.code();
        if code >= 2 * self.rank {
            return None;
        }
        match self.transitions[state * 2 * self.rank + code] {
            NONE => None,
            t => Some(t as usize),
        }
    }

    /// Graph distance from the base to `state`.
    pub fn depth(&self, state: usize) -> usize {
        self.depth[state] as usize
    }

    /// Follows `w` from `state`; `None` as soon as a letter is missing.
    pub fn read(&self, state: usize, w: &Word) -> Option<usize> {
        w.letters().iter().try_fold(state, |s, &l| self.transition(s, l))
    }

    /// Reads the longest possible prefix of `w` from `state`, returning the
    /// state reached and the number of letters consumed.
    pub fn read_prefix(&self, state: usize, w: &Word) -> (usize, usize) {
        let mut s = state;
        for (i, &l) in w.letters().iter().enumerate() {
            match self.transition(s, l) {
                Some(t) => s = t,
                None => return (s, i),
            }
        }
        (s, w.len())
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.read(0, w) == Some(0)
    }

    /// Rank of the subgroup: `#edges − #states + 1`.
    pub fn rank(&self) -> usize {
        self.num_edges() + 1 - self.states
    }

    /// The automaton is a finite cover exactly when every state has all
    /// `2k` directions; then the index is the number of states.
    pub fn index(&self) -> Index {
        if self.transitions.iter().all(|&t| t != NONE) {
            Index::Finite(self.states)
        } else {
            Index::Infinite
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.states == 1 && self.num_edges() == 0
    }

    /// Words labeling the breadth-first spanning tree paths from the base.
    pub fn state_paths(&self) -> Vec<Word> {
        let mut paths: Vec<Option<Word>> = vec![None; self.states];
        paths[0] = Some(Word::identity());
        let mut queue = VecDeque::from([0usize]);
        let group = self.group();
        while let Some(v) = queue.pop_front() {
            for l in group.letters() {
                if let Some(t) = self.transition(v, l) {
                    if paths[t].is_none() {
                        paths[t] = Some(paths[v].as_ref().unwrap().mul(&Word::letter(l)));
                        queue.push_back(t);
                    }
                }
            }
        }
        paths.into_iter().map(|p| p.expect("core graphs are connected")).collect()
    }

    /// A free basis read off the spanning tree of [`Self::state_paths`].
    pub fn generators(&self) -> Vec<Word> {
        let paths = self.state_paths();
        let mut gens = Vec::with_capacity(self.rank());
        for p in 0..self.states {
            for i in 0..self.rank {
                let l = Letter::new(i, false);
                let Some(q) = self.transition(p, l) else { continue };
                // In a folded graph, tree edges are exactly those closing up.
                let g = paths[p].mul(&Word::letter(l)).mul(&paths[q].inverse());
                if !g.is_identity() {
                    gens.push(g);
                }
            }
        }
        debug_assert_eq!(gens.len(), self.rank());
        gens
    }

    fn check_rank(&self, other: &SubgroupAutomaton) -> Result<(), StallingsError> {
        if self.rank != other.rank {
            return Err(StallingsError::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    /// `gHg⁻¹`.
    pub fn conjugate(&self, g: &Word) -> Result<SubgroupAutomaton, StallingsError> {
        let group = self.group();
        group.check(g)?;
        let gens: Vec<Word> = self.generators().iter().map(|h| h.conjugate_by(g)).collect();
        SubgroupAutomaton::from_generators(&group, &gens)
    }

    /// `⟨H ∪ K⟩`.
    pub fn join(&self, other: &SubgroupAutomaton) -> Result<SubgroupAutomaton, StallingsError> {
        self.check_rank(other)?;
        let mut gens = self.generators();
        gens.extend(other.generators());
        SubgroupAutomaton::from_generators(&self.group(), &gens)
    }

    /// `⟨H ∪ words⟩`.
    pub fn join_words(&self, words: &[Word]) -> Result<SubgroupAutomaton, StallingsError> {
        let mut gens = self.generators();
        gens.extend(words.iter().cloned());
        SubgroupAutomaton::from_generators(&self.group(), &gens)
    }

    /// `H ∩ K`, from the product automaton at the paired base states.
    pub fn intersect(&self, other: &SubgroupAutomaton) -> Result<SubgroupAutomaton, StallingsError> {
        self.check_rank(other)?;
        let group = self.group();
        let pair_id = |p: usize, q: usize| p * other.states + q;
        let mut ids = vec![usize::MAX; self.states * other.states];
        let mut pairs = vec![(0usize, 0usize)];
        ids[pair_id(0, 0)] = 0;
        let mut edges = Vec::new();
        let mut head = 0;
        while head < pairs.len() {
            let (p, q) = pairs[head];
            let src = head;
            head += 1;
            for i in 0..self.rank {
                let l = Letter::new(i, false);
                if let (Some(p2), Some(q2)) = (self.transition(p, l), other.transition(q, l)) {
                    let id = pair_id(p2, q2);
                    if ids[id] == usize::MAX {
                        ids[id] = pairs.len();
                        pairs.push((p2, q2));
                    }
                    edges.push((src, l, ids[id]));
                }
            }
            for i in 0..self.rank {
                let l = Letter::new(i, true);
                if let (Some(p2), Some(q2)) = (self.transition(p, l), other.transition(q, l)) {
                    let id = pair_id(p2, q2);
                    if ids[id] == usize::MAX {
                        ids[id] = pairs.len();
                        pairs.push((p2, q2));
                    }
                }
            }
        }
        SubgroupAutomaton::from_edges(&group, pairs.len(), &edges)
    }

    /// `min_{h ∈ H} d(w, h)`.
    ///
    /// The geodesic from the identity to `w` stays in the hull of `H(1)` for
    /// exactly the prefix that reads in the automaton; past that point every
    /// path to the orbit goes back through the projection, whose distance to
    /// the nearest orbit point is the depth of the state reached.
    pub fn distance_to_orbit(&self, w: &Word) -> usize {
        let (state, consumed) = self.read_prefix(0, w);
        (w.len() - consumed) + self.depth(state)
    }

    /// Membership of every element of a finite window.
    pub fn trace<'a, I: IntoIterator<Item = &'a Word>>(&self, window: I) -> Trace {
        let window: BTreeSet<Word> = window.into_iter().cloned().collect();
        let hits = window.iter().filter(|w| self.contains(w)).cloned().collect();
        Trace { window, hits }
    }

    /// Whether `⟨H, g⟩` is naturally `H ∗ ⟨g⟩`.
    ///
    /// The natural map `H ∗ ⟨g⟩ → ⟨H, g⟩` is onto; both sides are free, and
    /// a surjection between free groups of the same finite rank is an
    /// isomorphism. So it suffices to compare ranks.
    pub fn certify_free_product(&self, g: &Word) -> Result<bool, StallingsError> {
        if g.is_identity() {
            return Err(StallingsError::IdentityElement);
        }
        let joined = self.join_words(std::slice::from_ref(g))?;
        Ok(joined.rank() == self.rank() + 1)
    }

    /// Whether every state has at most one edge per label in each direction
    /// (checked over the stored transitions).
    pub fn is_folded(&self) -> bool {
        let alphabet = 2 * self.rank;
        (0..self.states).all(|p| {
            (0..alphabet).all(|l| match self.transitions[p * alphabet + l] {
                NONE => true,
                q => self.transitions[q as usize * alphabet + (l ^ 1)] == p as u32,
            })
        })
    }

    /// Whether every non-base state has degree at least two.
    pub fn is_core(&self) -> bool {
        let alphabet = 2 * self.rank;
        (1..self.states).all(|p| {
            self.transitions[p * alphabet..(p + 1) * alphabet].iter().filter(|&&t| t != NONE).count() >= 2
        })
    }

    /// Line-oriented text form: the state count, `base=0`, then one
    /// `src label dst` line per edge with a positive label.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.states).unwrap();
        writeln!(out, "base=0").unwrap();
        for p in 0..self.states {
            for i in 0..self.rank {
                let l = Letter::new(i, false);
                if let Some(q) = self.transition(p, l) {
                    writeln!(out, "{p} {} {q}", l.to_char()).unwrap();
                }
            }
        }
        out
    }

    /// Parses [`Self::to_text`] output. Edge labels may be any single
    /// letter; unfolded input is folded.
    pub fn from_text(group: &FreeGroup, text: &str) -> Result<SubgroupAutomaton, StallingsError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, message: &str| StallingsError::Parse { line, message: message.to_string() };
        let (line, first) = lines.next().ok_or_else(|| parse_err(0, "missing state count"))?;
        let states: usize = first.parse().map_err(|_| parse_err(line, "state count is not an integer"))?;
        if states == 0 {
            return Err(parse_err(line, "state count must be positive"));
        }
        let (line, base) = lines.next().ok_or_else(|| parse_err(line, "missing base line"))?;
        if base.replace(' ', "") != "base=0" {
            return Err(parse_err(line, "expected base=0"));
        }
        let mut edges = Vec::new();
        for (line, text) in lines {
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(line, "expected `src label dst`"));
            }
            let p: usize = parts[0].parse().map_err(|_| parse_err(line, "bad source state"))?;
            let q: usize = parts[2].parse().map_err(|_| parse_err(line, "bad target state"))?;
            let mut chars = parts[1].chars();
            let l = match (chars.next().and_then(Letter::from_char), chars.next()) {
                (Some(l), None) => l,
                _ => return Err(parse_err(line, "label must be a single letter")),
            };
            if p >= states || q >= states {
                return Err(parse_err(line, "state out of range"));
            }
            if l.generator() >= group.rank() {
                return Err(parse_err(line, "label outside the rank"));
            }
            edges.push((p, l, q));
        }
        SubgroupAutomaton::from_edges(group, states, &edges)
    }
}

/// Membership of a subgroup restricted to a finite window of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub window: BTreeSet<Word>,
    pub hits: BTreeSet<Word>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FreeGroup {
        FreeGroup::new(2).unwrap()
    }

    fn sub(words: &[&str]) -> SubgroupAutomaton {
        let g = f2();
        let gens: Vec<Word> = words.iter().map(|s| g.parse(s).unwrap()).collect();
        SubgroupAutomaton::from_generators(&g, &gens).unwrap()
    }

    fn w(s: &str) -> Word {
        f2().parse(s).unwrap()
    }

    #[test]
    fn folding_examples() {
        let a = sub(&["a"]);
        assert_eq!(a.num_states(), 1);
        assert_eq!(a.num_edges(), 1);
        assert_eq!(a.transition(0, Letter::new(0, false)), Some(0));

        let parity = sub(&["aa", "ab", "bb"]);
        assert_eq!(parity.num_states(), 2);
        assert!(parity.is_folded() && parity.is_core());

        let trivial = sub(&[]);
        assert_eq!((trivial.num_states(), trivial.num_edges()), (1, 0));
        assert!(trivial.is_trivial());
    }

    #[test]
    fn membership_examples() {
        assert!(sub(&["a"]).contains(&w("aaa")));
        assert!(!sub(&["a"]).contains(&w("b")));
        assert!(sub(&["aa", "ab", "bb"]).contains(&w("ba")));
        assert!(!sub(&["aa", "ab", "bb"]).contains(&w("a")));
    }

    #[test]
    fn rank_and_index_examples() {
        assert_eq!((sub(&["a"]).rank(), sub(&["a"]).index()), (1, Index::Infinite));
        let parity = sub(&["aa", "ab", "bb"]);
        assert_eq!((parity.rank(), parity.index()), (3, Index::Finite(2)));
        assert_eq!((sub(&[]).rank(), sub(&[]).index()), (0, Index::Infinite));
        assert_eq!(SubgroupAutomaton::whole(&f2()).index(), Index::Finite(1));
        // Redundant generators do not change the rank.
        assert_eq!(sub(&["a", "aa", "bab", "B"]).rank(), 2);
    }

    #[test]
    fn generator_order_is_irrelevant() {
        assert_eq!(sub(&["aa", "ab", "bb"]), sub(&["bb", "aa", "ab"]));
        assert_eq!(sub(&["aba", "bb"]), sub(&["bb", "ABA"]));
    }

    #[test]
    fn conjugation_intersection_join() {
        assert!(sub(&["a"]).intersect(&sub(&["b"])).unwrap().is_trivial());
        assert_eq!(sub(&["aa"]).intersect(&sub(&["aaa"])).unwrap(), sub(&["aaaaaa"]));
        let c = sub(&["a"]).conjugate(&w("b")).unwrap();
        assert_eq!(c, sub(&["baB"]));
        assert!(c.contains(&w("baB")));
        assert!(!c.contains(&w("a")));
        assert_eq!(sub(&["a"]).join(&sub(&["b"])).unwrap(), SubgroupAutomaton::whole(&f2()));
        assert_eq!(sub(&[]).conjugate(&w("ab")).unwrap(), sub(&[]));
    }

    #[test]
    fn free_basis_generates() {
        for gens in [vec!["aa", "ab", "bb"], vec!["baB", "abab"], vec!["a"], vec![], vec!["aab", "bA", "bbb"]] {
            let h = sub(&gens);
            let basis = h.generators();
            assert_eq!(basis.len(), h.rank());
            assert_eq!(SubgroupAutomaton::from_generators(&f2(), &basis).unwrap(), h);
        }
    }

    #[test]
    fn distance_to_orbit_examples() {
        let a = sub(&["a"]);
        assert_eq!(a.distance_to_orbit(&w("aaaaa")), 0);
        assert_eq!(a.distance_to_orbit(&w("bbb")), 3);
        assert_eq!(a.distance_to_orbit(&w("aab")), 1);
        let c = sub(&["baB"]);
        assert_eq!(c.distance_to_orbit(&w("ba")), 1);
        assert_eq!(c.distance_to_orbit(&w("b")), 1);
    }

    #[test]
    fn trace_examples() {
        let g = f2();
        let hits: Vec<String> = sub(&["a"]).trace(&g.ball(1)).hits.iter().map(|w| w.to_string()).collect();
        assert_eq!(hits, ["1", "a", "A"]);
        let t = sub(&["aa", "ab", "bb"]).trace(&g.ball(2));
        assert_eq!(t.hits.len(), 13);
        assert!(t.hits.iter().all(|w| w.len() % 2 == 0));
        let t = sub(&[]).trace(&g.ball(3));
        assert_eq!(t.hits.iter().cloned().collect::<Vec<_>>(), vec![Word::identity()]);
    }

    #[test]
    fn free_product_certificate_examples() {
        assert!(sub(&["a"]).certify_free_product(&w("b")).unwrap());
        assert!(!sub(&["a"]).certify_free_product(&w("aa")).unwrap());
        assert_eq!(sub(&["a"]).certify_free_product(&Word::identity()), Err(StallingsError::IdentityElement));
    }

    #[test]
    fn text_round_trip() {
        let h = sub(&["aa", "ab", "bb"]);
        let text = h.to_text();
        assert_eq!(text, "2\nbase=0\n0 a 1\n0 b 1\n1 a 0\n1 b 0\n");
        assert_eq!(SubgroupAutomaton::from_text(&f2(), &text).unwrap(), h);
        let bad = SubgroupAutomaton::from_text(&f2(), "2\nbase=0\n0 c 1\n");
        assert!(matches!(bad, Err(StallingsError::Parse { line: 3, .. })));
        assert!(SubgroupAutomaton::from_text(&f2(), "x\n").is_err());
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let f3 = FreeGroup::new(3).unwrap();
        let h3 = SubgroupAutomaton::from_generators(&f3, &[f3.parse("c").unwrap()]).unwrap();
        assert_eq!(sub(&["a"]).join(&h3), Err(StallingsError::RankMismatch { left: 2, right: 3 }));
    }
}
