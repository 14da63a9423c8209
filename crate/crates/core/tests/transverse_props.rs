mod common;

use common::{generators, group, nontrivial_word, sub};
use hypmix::oracle::power_conjugate_search;
use hypmix::stallings::SubgroupAutomaton;
use hypmix::transverse::{
    apt_check, construct_transverse, is_transverse, max_gromov_product, overlap_bound, overlap_count,
    power_conjugate_into, TransversalityCertificate,
};
use proptest::prelude::*;

fn infinite_index(gens: &[hypmix::freegroup::Word]) -> Option<SubgroupAutomaton> {
    let h = SubgroupAutomaton::from_generators(&group(2), gens).unwrap();
    (!h.index().is_finite()).then_some(h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn power_conjugacy_is_sound(gens in generators(2, 3, 5), f in nontrivial_word(2, 6)) {
        let h = SubgroupAutomaton::from_generators(&group(2), &gens).unwrap();
        if let Some(pc) = power_conjugate_into(&h, &f).unwrap() {
            prop_assert!(pc.m >= 1 && pc.m as usize <= h.num_states());
            let fm = f.pow(pc.m as i64);
            prop_assert!(h.contains(&pc.v.inverse().mul(&fm).mul(&pc.v)));
            let cert = TransversalityCertificate::issue(&h, &f).unwrap();
            prop_assert!(!cert.is_transverse() && cert.check(&h).unwrap());
        }
    }

    #[test]
    fn power_conjugacy_is_complete_on_small_cores(gens in generators(2, 2, 3), f in nontrivial_word(2, 4)) {
        let h = SubgroupAutomaton::from_generators(&group(2), &gens).unwrap();
        prop_assume!(h.num_states() <= 4);
        let fast = power_conjugate_into(&h, &f).unwrap().map(|pc| pc.m);
        let brute = power_conjugate_search(&h, &f, 8, 4).map(|(m, _)| m);
        prop_assert_eq!(fast, brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transverse_overlap_stays_bounded(gens in generators(2, 2, 4), f in nontrivial_word(2, 4), e in 0usize..=3, r in 0usize..=4) {
        let Some(h) = infinite_index(&gens) else { return Ok(()) };
        prop_assume!(is_transverse(&h, &f).unwrap());
        let narrow = overlap_bound(&h, &f, e, r, -200..=200);
        let wide = overlap_bound(&h, &f, e, r, -400..=400);
        prop_assert_eq!(narrow.counts, wide.counts);
    }

    #[test]
    fn conjugate_powers_overlap_linearly(gens in generators(2, 2, 4), f in nontrivial_word(2, 4)) {
        let h = SubgroupAutomaton::from_generators(&group(2), &gens).unwrap();
        let Some(pc) = power_conjugate_into(&h, &f).unwrap() else { return Ok(()) };
        let e = pc.v.len();
        let narrow = overlap_count(&h, &f, &pc.v, e, -200..=200);
        let wide = overlap_count(&h, &f, &pc.v, e, -400..=400);
        prop_assert!(narrow >= 401 / pc.m as usize);
        prop_assert!(wide + 1 >= 2 * narrow, "{} vs {}", narrow, wide);
    }

    #[test]
    fn gromov_products_stabilise(gens in generators(2, 2, 4), g in nontrivial_word(2, 4)) {
        let Some(h) = infinite_index(&gens) else { return Ok(()) };
        prop_assume!(is_transverse(&h, &g).unwrap());
        let wide = max_gromov_product(&h, &g, -50..=50, 6);
        let narrow = max_gromov_product(&h, &g, -25..=25, 6);
        prop_assert_eq!(wide, narrow);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn apt_is_inversion_symmetric(gens in generators(2, 2, 4), g in nontrivial_word(2, 4)) {
        let Some(h) = infinite_index(&gens) else { return Ok(()) };
        prop_assume!(is_transverse(&h, &g).unwrap());
        let forward = apt_check(&h, &g, 2, 16).unwrap();
        let backward = apt_check(&h, &g.inverse(), 2, 16).unwrap();
        prop_assert!(forward.verified && backward.verified);
        prop_assert_eq!(forward.cosets.len(), backward.cosets.len());
    }
}

#[test]
fn constructed_elements_are_transverse_to_every_target() {
    let f2 = group(2);
    let targets = vec![sub(2, &["a"]), sub(2, &["b"]), sub(2, &["ab", "BA"])];
    for g in ["ab", "aab", "abAB"] {
        let g = f2.parse(g).unwrap();
        let c = construct_transverse(&targets, &g).unwrap();
        for h in &targets {
            assert!(is_transverse(h, &c.f).unwrap(), "{}", c.f);
            let report = overlap_bound(h, &c.f, 3, 4, -100..=100);
            assert_eq!(report.counts, overlap_bound(h, &c.f, 3, 4, -200..=200).counts);
        }
    }
    let finite = sub(2, &["aa", "ab", "bb"]);
    assert!(construct_transverse(&[finite], &f2.parse("ab").unwrap()).is_err());
}
