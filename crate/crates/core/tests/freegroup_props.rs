mod common;

use common::{group, raw_letters, word};
use hypmix::freegroup::{Word, Q};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduce_is_idempotent(raw in raw_letters(3, 30)) {
        let once = Word::reduce(raw);
        let twice = Word::reduce(once.letters().to_vec());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn multiplication_is_associative(a in word(3, 12), b in word(3, 12), c in word(3, 12)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn inverse_cancels(a in word(3, 16)) {
        prop_assert!(a.mul(&a.inverse()).is_identity());
        prop_assert!(a.inverse().mul(&a).is_identity());
    }

    #[test]
    fn metric_axioms(u in word(2, 12), v in word(2, 12), x in word(2, 12), g in word(2, 12)) {
        prop_assert!(u.distance(&x) <= u.distance(&v) + v.distance(&x));
        prop_assert_eq!(u.distance(&v), v.distance(&u));
        prop_assert_eq!(g.mul(&u).distance(&g.mul(&v)), u.distance(&v));
    }

    #[test]
    fn gromov_product_is_distance_to_geodesic(x in word(2, 8), y in word(2, 8), s in word(2, 8)) {
        let f2 = group(2);
        let gp = f2.gromov_product(&x, &y, &s);
        prop_assert_eq!(gp.doubled(), 2 * f2.distance_to_geodesic(&s, &x, &y) as i64);
    }

    #[test]
    fn cyclically_reduced_powers_are_geodesic(w in word(2, 8), reps in 1usize..6) {
        prop_assume!(!w.is_identity());
        let f2 = group(2);
        let red = w.cyclic_reduce();
        let path = f2.labeled_path(&vec![red.core.clone(); reps], &Word::identity()).unwrap();
        prop_assert_eq!(path.minimal_c(Q::from_integer(1)).unwrap(), Q::from_integer(0));
        let general = f2.labeled_path(&vec![w.clone(); reps], &Word::identity()).unwrap();
        let c = general.minimal_c(Q::from_integer(1)).unwrap();
        // Each junction between copies backtracks over the conjugator.
        let expected = 2 * (reps as i64 - 1) * red.conjugator.len() as i64;
        prop_assert_eq!(c, Q::from_integer(expected));
    }

    #[test]
    fn parse_round_trips(w in word(3, 20)) {
        let f3 = group(3);
        prop_assert_eq!(f3.parse(&w.to_string()).unwrap(), w);
    }
}

#[test]
fn cyclic_reduction_recombines() {
    let f2 = group(2);
    for w in f2.ball(5) {
        let r = w.cyclic_reduce();
        assert!(r.core.is_cyclically_reduced());
        assert_eq!(r.core.conjugate_by(&r.conjugator), w, "{w}");
    }
}
