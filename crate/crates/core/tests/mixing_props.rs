mod common;

use common::{group, sub, word};
use hypmix::mixing::{estimate_mixing, free_product_experiment, witness_subgroup, MixingPair};
use hypmix::walks::StepMeasure;
use proptest::prelude::*;

fn standard() -> MixingPair {
    MixingPair::new(sub(2, &["a"]), sub(2, &["b"]), group(2).ball(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    // Every success is re-verified by plain membership: `L ∩ F = K ∩ F` and
    // `f ∈ wLw⁻¹ ⇔ w⁻¹fw ∈ L`.
    #[test]
    fn successful_witnesses_are_sound(w in word(2, 14)) {
        let pair = standard();
        let outcome = pair.outcome(&w).unwrap();
        if outcome.success() {
            let l = witness_subgroup(&pair.h, &pair.k, &w).unwrap();
            for f in &pair.window {
                prop_assert_eq!(l.contains(f), pair.k.contains(f), "K side at {}", f);
                let pulled = w.inverse().mul(f).mul(&w);
                prop_assert_eq!(l.contains(&pulled), pair.h.contains(f), "H side at {}", f);
            }
            prop_assert_eq!(l.rank(), pair.h.rank() + pair.k.rank());
        }
    }
}

#[test]
fn every_trial_success_is_sound() {
    let pair = standard();
    let mu = StepMeasure::simple(&group(2));
    let est = estimate_mixing(&pair, &mu, 40, 300, 21).unwrap();
    assert!(est.successes > 0);
    for w in group(2).ball(4) {
        let outcome = pair.outcome(&w).unwrap();
        if outcome.success() {
            for f in &pair.window {
                assert_eq!(outcome.l.contains(f), pair.k.contains(f));
                assert_eq!(outcome.l.contains(&w.inverse().mul(f).mul(&w)), pair.h.contains(f));
            }
        }
    }
}

#[test]
fn mixing_trend_is_monotone() {
    let pair = standard();
    let mu = StepMeasure::simple(&group(2));
    let ests: Vec<_> = [10, 20, 40, 80, 160]
        .iter()
        .map(|&n| estimate_mixing(&pair, &mu, n, 400, 2).unwrap())
        .collect();
    for w in ests.windows(2) {
        let slack = 2.0 * (w[0].sigma().powi(2) + w[1].sigma().powi(2)).sqrt();
        assert!(w[1].p_hat + slack >= w[0].p_hat, "{} then {}", w[0].p_hat, w[1].p_hat);
    }
    assert!(ests[4].p_hat >= 0.9);
}

#[test]
fn free_products_are_absorbed() {
    let mu = StepMeasure::simple(&group(2));
    let est = free_product_experiment(&sub(2, &["ab"]), &mu, 100, 300, 4).unwrap();
    assert!(est.p_hat >= 0.95, "{}", est.p_hat);
}
