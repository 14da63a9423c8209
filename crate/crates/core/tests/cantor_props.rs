use hypmix::cantor::{
    apply, claim1_f, claim2_g, claim3_witness, estimate_qn, image_antichain, labels_of_length, order_cones,
    sends_cone, xi, Applied, ConeAntichain, ConeLabel, GElement, S18Perm,
};
use hypmix::freegroup::{Letter, Word, Q};
use hypmix::oracle::enumerate_walk;
use hypmix::rng::substream;
use proptest::prelude::*;

const CAP: usize = 64;

fn labels_up_to(n: usize) -> Vec<ConeLabel> {
    (1..=n).flat_map(labels_of_length).collect()
}

fn label(s: &str) -> ConeLabel {
    ConeLabel::parse(s).unwrap()
}

/// A label of length `n` outside `F(x, y)`, other than the pivot.
fn claim_label() -> impl Strategy<Value = ConeLabel> {
    (2usize..=5, any::<u64>())
        .prop_map(|(n, seed)| ConeLabel::random_outside_f2(n, &mut substream(seed, 0)))
        .prop_filter("not the pivot", |u| *u != ConeLabel::pivot(u.len()))
}

fn image_of(g: &GElement, p: &ConeLabel) -> ConeAntichain {
    image_antichain(g, &ConeAntichain::single(p.clone()), CAP).unwrap()
}

#[test]
fn xi_composes_exhaustively() {
    let short = labels_up_to(2);
    for u in &short {
        let points: Vec<ConeLabel> = (0..=3 - u.len()).flat_map(|k| order_cones(u, k)).collect();
        for p in &points {
            assert_eq!(&xi(u, u, p).unwrap(), p);
        }
        for v in &short {
            let moved: Vec<ConeLabel> = points.iter().map(|p| xi(u, v, p).unwrap()).collect();
            for w in &short {
                for (p, m) in points.iter().zip(&moved) {
                    assert_eq!(xi(v, w, m).unwrap(), xi(u, w, p).unwrap(), "{u} {v} {w} at {p}");
                }
            }
        }
    }
}

#[test]
fn xi_preserves_order() {
    let short = labels_up_to(2);
    for u in &short {
        let source = order_cones(u, 2);
        for v in &short {
            let mapped: Vec<ConeLabel> = source.iter().map(|p| xi(u, v, p).unwrap()).collect();
            assert!(mapped.windows(2).all(|w| w[0] < w[1]), "{u} -> {v}");
            assert_eq!(mapped, order_cones(v, 2));
        }
    }
}

fn check_bijective(g: &GElement, d: usize) {
    let images: Vec<ConeLabel> =
        labels_of_length(d).iter().flat_map(|p| image_of(g, p).labels().clone()).collect();
    let union = ConeAntichain::new(images).expect("images of disjoint cones are disjoint");
    assert_eq!(union, ConeAntichain::everything(d), "{g} at depth {d}");
}

#[test]
fn generators_permute_the_partitions() {
    let mut gens: Vec<GElement> = (0..4).map(|c| GElement::f2(Letter::from_code(c))).collect();
    for seed in 0..8 {
        gens.push(GElement::perm(S18Perm::random(&mut substream(seed, 0))));
    }
    gens.push(GElement::perm(S18Perm::transposition(&label("zz"), &label("xZ")).unwrap()));
    for g in &gens {
        for d in 2..=4 {
            check_bijective(g, d);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn permutations_fix_f2_prefixes(seed in any::<u64>()) {
        let g = GElement::perm(S18Perm::random(&mut substream(seed, 0)));
        for w in labels_of_length(4).into_iter().filter(|w| w.prefix(2).in_f2()) {
            prop_assert_eq!(apply(&g, &w, 0), Applied::Label(w.clone()));
        }
    }

    #[test]
    fn claim1_sends_both_cones(u in claim_label()) {
        let n = u.len();
        let f = claim1_f(&u).unwrap();
        let zz = label("zz");
        let big = ConeLabel::pivot(2);
        prop_assert!(sends_cone(&f, &u, &zz, CAP).unwrap());
        prop_assert!(sends_cone(&f, &ConeLabel::pivot(n), &big, CAP).unwrap());
        // Pointwise at depth n + 2.
        for p in order_cones(&u, 2) {
            prop_assert!(image_of(&f, &p).labels().iter().all(|l| l.starts_with(&zz)));
        }
        for p in order_cones(&ConeLabel::pivot(n), 2) {
            prop_assert!(image_of(&f, &p).labels().iter().all(|l| l.starts_with(&big)));
        }
    }

    #[test]
    fn claim2_swaps_and_fixes_the_rest(u in claim_label(), seed in any::<u64>()) {
        let n = u.len();
        let pivot = ConeLabel::pivot(n);
        let g = claim2_g(&u).unwrap();
        prop_assert!(sends_cone(&g, &u, &pivot, CAP).unwrap());
        prop_assert!(sends_cone(&g, &pivot, &u, CAP).unwrap());
        let mut rng = substream(seed, 1);
        let mut sampled = 0;
        while sampled < 100 {
            let p = ConeLabel::random_outside_f2(n + 3, &mut rng);
            let p = if sampled % 2 == 0 { p } else { random_any(n + 3, &mut rng) };
            if p.starts_with(&u) || p.starts_with(&pivot) {
                continue;
            }
            prop_assert_eq!(image_of(&g, &p), ConeAntichain::single(p.clone()), "moved {}", p);
            sampled += 1;
        }
    }

    #[test]
    fn claim3_realises_the_pairs(n in 2usize..=4, seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = substream(seed, 2);
        let mut us: Vec<ConeLabel> = Vec::new();
        let mut vs: Vec<ConeLabel> = Vec::new();
        while us.len() < k {
            let u = ConeLabel::random_outside_f2(n, &mut rng);
            let v = ConeLabel::random_outside_f2(n, &mut rng);
            if !us.contains(&u) && !vs.contains(&v) {
                us.push(u);
                vs.push(v);
            }
        }
        let pairs: Vec<(ConeLabel, ConeLabel)> = us.into_iter().zip(vs).collect();
        let g = claim3_witness(&pairs, n).unwrap();
        for (u, v) in &pairs {
            prop_assert!(sends_cone(&g, u, v, CAP).unwrap(), "{} -> {}", u, v);
        }
    }
}

fn random_any(n: usize, rng: &mut hypmix::rng::TrialRng) -> ConeLabel {
    use rand::Rng;
    let mut letters: Vec<Letter> = Vec::with_capacity(n);
    while letters.len() < n {
        let l = Letter::from_code(rng.random_range(0..6));
        if letters.last().is_none_or(|p| p.inverse() != l) {
            letters.push(l);
        }
    }
    ConeLabel::from_word(Word::reduce(letters)).unwrap()
}

/// With letter mass 1/4 there are no permutation steps and
/// `w_n(Cone(z)) = Cone(w_n·z)`, so `q_n = P(w_n starts with x²)`.
#[test]
fn qn_matches_enumeration_without_permutations() {
    let n = 8;
    let x = Letter::new(0, false);
    let support: Vec<(Word, f64)> = (0..4).map(|c| (Word::letter(Letter::from_code(c)), 0.25)).collect();
    let xx = Word::letter(x).pow(2);
    let exact: f64 = enumerate_walk(&support, n).iter().filter(|(w, _)| w.starts_with(&xx)).map(|(_, p)| p).sum();
    let est = estimate_qn(Q::new(1, 4), n, 40_000, CAP, 8).unwrap();
    assert!((est.p_hat - exact).abs() <= 4.0 * est.sigma(), "{} vs {exact}", est.p_hat);
}

#[test]
fn qn_stays_below_the_ceiling() {
    for (p, n) in [(Q::new(1, 8), 20), (Q::new(1, 16), 40), (Q::new(1, 4), 30)] {
        let est = estimate_qn(p, n, 5_000, 256, 3).unwrap();
        assert!(est.p_hat <= 0.35 + 3.0 * est.sigma(), "p = {p}, n = {n}: {}", est.p_hat);
    }
}
