mod common;

use common::{group, nontrivial_word};
use hypmix::rng::substream;
use hypmix::walks::{convolve, drift_estimate, walk_endpoint, ConvolutionCap, StepMeasure};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn symmetric_measure(pairs: &[(hypmix::freegroup::Word, u32)]) -> StepMeasure {
    let total: u32 = pairs.iter().map(|(_, w)| 2 * w).sum();
    let mut weights = Vec::new();
    for (w, k) in pairs {
        let q = BigRational::new(BigInt::from(*k), BigInt::from(total));
        weights.push((w.clone(), q.clone()));
        weights.push((w.inverse(), q));
    }
    StepMeasure::from_weights(&group(2), weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn convolution_is_a_probability(pairs in prop::collection::vec((nontrivial_word(2, 3), 1u32..5), 1..=4), n in 0usize..=5) {
        let mu = symmetric_measure(&pairs);
        let law = convolve(&mu, n, ConvolutionCap::default()).unwrap();
        let total: BigRational = law.values().sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn symmetric_convolution_is_inversion_invariant(pairs in prop::collection::vec((nontrivial_word(2, 3), 1u32..5), 1..=4), n in 0usize..=5) {
        let mu = symmetric_measure(&pairs);
        let law = convolve(&mu, n, ConvolutionCap::default()).unwrap();
        for (w, p) in &law {
            let q = law.get(&w.inverse()).cloned().unwrap_or_else(BigRational::zero);
            prop_assert_eq!(p, &q, "{}", w);
        }
    }
}

#[test]
fn convolution_sums_to_one_up_to_the_cap() {
    let mu = StepMeasure::simple(&group(2));
    for n in 0..=8 {
        let law = convolve(&mu, n, ConvolutionCap::default()).unwrap();
        assert!(law.values().sum::<BigRational>().is_one(), "n = {n}");
    }
    assert!(convolve(&mu, 9, ConvolutionCap::default()).is_err());
}

#[test]
fn two_step_samples_match_the_exact_law() {
    let f2 = group(2);
    let set: Vec<_> = ["a", "A", "b", "B", "ab", "BA"].iter().map(|s| f2.parse(s).unwrap()).collect();
    let mu = StepMeasure::uniform_on(&f2, &set).unwrap();
    let law = convolve(&mu, 2, ConvolutionCap::default()).unwrap();
    let samples = 100_000u64;
    let mut counts = BTreeMap::new();
    for t in 0..samples {
        let w = walk_endpoint(&mu, 2, &mut substream(11, t));
        *counts.entry(w).or_insert(0u64) += 1;
    }
    for w in counts.keys() {
        assert!(law.contains_key(w), "sampled {w} outside the support");
    }
    for (w, p) in &law {
        let p = p.to_f64().unwrap();
        let seen = *counts.get(w).unwrap_or(&0) as f64;
        let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
        assert!((seen - samples as f64 * p).abs() <= 3.0 * sigma, "{w}: {seen} vs {}", samples as f64 * p);
    }
}

#[test]
fn walks_are_loxodromic() {
    let mu = StepMeasure::simple(&group(2));
    let trials = 20_000u64;
    let nontrivial = (0..trials).filter(|&t| !walk_endpoint(&mu, 100, &mut substream(5, t)).is_identity()).count();
    assert!(nontrivial as f64 / trials as f64 > 0.999, "{nontrivial}");
}

#[test]
fn point_mass_drift_is_exact() {
    let f2 = group(2);
    let mu = StepMeasure::point_mass(&f2, f2.parse("a").unwrap()).unwrap();
    let d = drift_estimate(&mu, 1000, 50, 3, false).unwrap();
    assert_eq!(d.estimate, 1.0);
}

#[test]
fn sampling_does_not_depend_on_thread_count() {
    let mu = StepMeasure::simple(&group(3));
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| drift_estimate(&mu, 200, 500, 9, true).unwrap());
    let b = four.install(|| drift_estimate(&mu, 200, 500, 9, true).unwrap());
    assert_eq!(a, b);
}
