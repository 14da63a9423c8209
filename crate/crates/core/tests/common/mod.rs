#![allow(dead_code)]

use hypmix::freegroup::{FreeGroup, Letter, Word};
use hypmix::stallings::SubgroupAutomaton;
use proptest::prelude::*;

pub fn group(rank: usize) -> FreeGroup {
    FreeGroup::new(rank).unwrap()
}

/// Raw (unreduced) letter sequences over `F_rank`.
pub fn raw_letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
}

pub fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    raw_letters(rank, max_len).prop_map(Word::reduce)
}

pub fn nontrivial_word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    word(rank, max_len).prop_filter("nontrivial", |w| !w.is_identity())
}

pub fn generators(rank: usize, max_gens: usize, max_len: usize) -> impl Strategy<Value = Vec<Word>> {
    prop::collection::vec(nontrivial_word(rank, max_len), 1..=max_gens)
}

pub fn sub(rank: usize, gens: &[&str]) -> SubgroupAutomaton {
    let g = group(rank);
    let words: Vec<Word> = gens.iter().map(|s| g.parse(s).unwrap()).collect();
    SubgroupAutomaton::from_generators(&g, &words).unwrap()
}
