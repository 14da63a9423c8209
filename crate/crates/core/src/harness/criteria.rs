//! The acceptance suite. Each criterion returns pass/fail together with the
//! rows it computed; criterion 14 reruns the others with 1 and 4 worker
//! threads and compares the CSV bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{emit, Format, ResultRow};
use crate::cantor::{self, Applied, ConeAntichain, ConeLabel};
use crate::freegroup::{FreeGroup, Letter, Q, Word};
use crate::mixing::{self, MixingPair};
use crate::oracle;
use crate::rng::{self, TrialRng};
use crate::stallings::{Index, SubgroupAutomaton};
use crate::transverse;
use crate::walks::{self, StepMeasure};

/// Seed of the frozen pilot runs behind the golden values.
pub const ACCEPTANCE_SEED: u64 = 1;

/// Successes out of 500 for the standard mixing instance at
/// n = 10, 20, 40, 80, 160 under [`ACCEPTANCE_SEED`].
pub const GOLDEN_MIXING: [usize; 5] = [440, 489, 500, 500, 500];

/// Successes out of 500 for free-product absorption at n = 100 under
/// [`ACCEPTANCE_SEED`].
pub const GOLDEN_FREE_PRODUCT: usize = 500;

const MIXING_SCHEDULE: [usize; 5] = [10, 20, 40, 80, 160];

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub rows: Vec<ResultRow>,
    pub seconds: f64,
    pub limit_seconds: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let limit = self.limit_seconds.map(|l| format!(" / {l:.0} s")).unwrap_or_default();
        format!(
            "{} criterion {:>2} {}: {} ({:.1} s{limit})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }

    pub fn csv(&self) -> String {
        emit(&self.rows, Format::Csv)
    }
}

struct Check {
    passed: bool,
    detail: String,
    rows: Vec<ResultRow>,
}

fn info(id: u32) -> (&'static str, Option<f64>) {
    match id {
        1 => ("stallings membership vs bouquet oracle", Some(60.0)),
        2 => ("finite-index rank formula", Some(5.0)),
        3 => ("drift of simple walks", Some(60.0)),
        4 => ("gromov product equals distance to geodesic", Some(30.0)),
        5 => ("broken geodesics at delta 0", None),
        6 => ("power conjugacy vs brute force", Some(120.0)),
        7 => ("transverse constructor", None),
        8 => ("mixing lower bound", Some(300.0)),
        9 => ("free-product absorption", Some(120.0)),
        10 => ("joint mixing union bound", None),
        11 => ("cantor claims 1-3", Some(120.0)),
        12 => ("transience constants", None),
        13 => ("non-mixing signature", Some(300.0)),
        14 => ("determinism across thread counts", None),
        _ => ("unknown", None),
    }
}

/// Runs one of criteria 1 to 13.
pub fn run_criterion(id: u32, seed: u64) -> CriterionResult {
    let (name, limit) = info(id);
    let start = Instant::now();
    let check = match id {
        1 => c1_membership(seed),
        2 => c2_nielsen_schreier(seed),
        3 => c3_drift(seed),
        4 => c4_gromov(),
        5 => c5_broken_geodesics(),
        6 => c6_power_conjugacy(),
        7 => c7_transverse(),
        8 => c8_mixing(seed),
        9 => c9_free_product(seed),
        10 => c10_joint(seed),
        11 => c11_claims(seed),
        12 => c12_transience(seed),
        13 => c13_non_mixing(seed),
        _ => Check { passed: false, detail: format!("no criterion {id}"), rows: vec![] },
    };
    let seconds = start.elapsed().as_secs_f64();
    let in_time = limit.is_none_or(|l| seconds <= l);
    let mut detail = check.detail;
    if !in_time {
        detail.push_str("; over the time limit");
    }
    CriterionResult { id, name, passed: check.passed && in_time, detail, rows: check.rows, seconds, limit_seconds: limit }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool").install(f)
}

/// Runs the requested criteria in order. Asking for 14 reruns every other
/// requested criterion (all of 1 to 13 if none) with 1 and 4 threads.
pub fn run_acceptance(ids: &[u32], seed: u64) -> Vec<CriterionResult> {
    let mut base: Vec<u32> = ids.iter().copied().filter(|&i| i != 14).collect();
    let determinism = ids.contains(&14);
    if determinism && base.is_empty() {
        base = (1..=13).collect();
    }
    let mut results: Vec<CriterionResult> = base.iter().map(|&id| run_criterion(id, seed)).collect();
    if determinism {
        let start = Instant::now();
        let mut mismatches = Vec::new();
        for threads in [1, 4] {
            let rerun: Vec<String> = in_pool(threads, || base.iter().map(|&id| run_criterion(id, seed).csv()).collect());
            for (r, csv) in results.iter().zip(rerun) {
                if r.csv() != csv {
                    mismatches.push(format!("{} with {threads} threads", r.id));
                }
            }
        }
        let (name, limit) = info(14);
        let detail = if mismatches.is_empty() {
            format!("criteria {base:?} identical with 1 and 4 threads")
        } else {
            format!("CSV differs for {}", mismatches.join(", "))
        };
        let rows = vec![ResultRow::new("acceptance", "criterion=14", "mismatches", mismatches.len() as f64, seed)];
        results.push(CriterionResult {
            id: 14,
            name,
            passed: mismatches.is_empty(),
            detail,
            rows,
            seconds: start.elapsed().as_secs_f64(),
            limit_seconds: limit,
        });
    }
    results
}

fn row(id: u32, params: impl Into<String>, metric: &str, value: f64, seed: u64) -> ResultRow {
    ResultRow::new(&format!("criterion{id}"), params, metric, value, seed)
}

fn f2() -> FreeGroup {
    FreeGroup::new(2).expect("rank 2")
}

/// Criterion generators draw from a stream separate from the trial streams.
fn instance_rng(seed: u64, id: u32) -> TrialRng {
    rng::substream(seed, u64::MAX - id as u64)
}

fn random_word(rank: usize, len: usize, r: &mut TrialRng) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_code(r.random_range(0..2 * rank));
        if letters.last().is_some_and(|&p| p == l.inverse()) {
            continue;
        }
        letters.push(l);
    }
    Word::reduce(letters)
}

fn c1_membership(seed: u64) -> Check {
    let group = f2();
    let mut r = instance_rng(seed, 1);
    let instances: Vec<Vec<Word>> = (0..200)
        .map(|_| {
            let count = r.random_range(1..=3);
            (0..count).map(|_| random_word(2, r.random_range(1..=6), &mut r)).collect()
        })
        .collect();
    let ball = group.ball(8);
    let results: Vec<(usize, usize, usize)> = instances
        .par_iter()
        .map(|gens| {
            let h = SubgroupAutomaton::from_generators(&group, gens).expect("valid generators");
            let oracle = oracle::BouquetOracle::new(gens);
            let mut mismatches = 0;
            let mut members = 0;
            for w in &ball {
                let a = h.contains(w);
                members += a as usize;
                mismatches += (a != oracle.contains(w)) as usize;
            }
            let unsound = oracle::bounded_products(gens, 4, 8).iter().filter(|w| !h.contains(w)).count();
            (mismatches, members, unsound)
        })
        .collect();
    let mismatches: usize = results.iter().map(|x| x.0).sum();
    let members: usize = results.iter().map(|x| x.1).sum();
    let unsound: usize = results.iter().map(|x| x.2).sum();
    let params = format!("subgroups=200;ball=8;words={}", ball.len());
    Check {
        passed: mismatches == 0 && unsound == 0,
        detail: format!("{mismatches} mismatches, {unsound} products rejected, over {} membership queries", 200 * ball.len()),
        rows: vec![
            row(1, params.clone(), "mismatches", mismatches as f64, seed),
            row(1, params.clone(), "products_rejected", unsound as f64, seed),
            row(1, params, "members", members as f64, seed),
        ],
    }
}

fn c2_nielsen_schreier(seed: u64) -> Check {
    let group = f2();
    let mut r = instance_rng(seed, 2);
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for i in 0..50 {
        let n = r.random_range(1..=5);
        let mut edges = Vec::new();
        for generator in 0..2 {
            let mut perm: Vec<usize> = (0..n).collect();
            for j in (1..n).rev() {
                perm.swap(j, r.random_range(0..=j));
            }
            for (src, &dst) in perm.iter().enumerate() {
                edges.push((src, Letter::new(generator, false), dst));
            }
        }
        let h = SubgroupAutomaton::from_edges(&group, n, &edges).expect("valid automaton");
        let refolded = SubgroupAutomaton::from_generators(&group, &h.generators()).expect("valid generators");
        let ok = match h.index() {
            Index::Finite(index) => {
                h.rank() == index + 1 && h.generators().len() == h.rank() && refolded == h && index <= n
            }
            Index::Infinite => false,
        };
        if !ok {
            failures.push(i);
        }
        rows.push(row(2, format!("instance={i};states={n}"), "rank_minus_one_minus_index", h.rank() as f64 - 1.0 - h.num_states() as f64, seed));
    }
    Check {
        passed: failures.is_empty(),
        detail: if failures.is_empty() { "rank - 1 = index in all 50 instances".into() } else { format!("failed instances {failures:?}") },
        rows,
    }
}

fn c3_drift(seed: u64) -> Check {
    let n = 10_000;
    let trials = 2000;
    let mut passed = true;
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    for k in [2usize, 3] {
        let group = FreeGroup::new(k).expect("rank");
        let mu = StepMeasure::simple(&group);
        let target = (k as f64 - 1.0) / k as f64;
        let d = walks::drift_estimate(&mu, n, trials, seed, true).expect("permissible");
        let reflected = oracle::reflected_length_speed(k, n, trials, seed);
        let ok = (d.estimate - target).abs() <= 0.01 && (reflected - target).abs() <= 0.01;
        passed &= ok;
        detail.push(format!("F{k}: {:.4} (oracle {:.4}, target {target:.4})", d.estimate, reflected));
        let params = format!("k={k};n={n};trials={trials}");
        rows.push(row(3, params.clone(), "drift", d.estimate, seed).with_ci(d.estimate - d.half_width, d.estimate + d.half_width));
        rows.push(row(3, params, "oracle_drift", reflected, seed));
    }
    Check { passed, detail: detail.join("; "), rows }
}

/// Vertices of `[x, y]`, from the prefixes of `x` and `y` beyond their
/// common prefix.
fn segment(x: &Word, y: &Word) -> Vec<Word> {
    let c = x.common_prefix_len(y);
    let mut out: Vec<Word> = (c..=x.len()).map(|i| x.prefix(i)).collect();
    out.extend((c + 1..=y.len()).map(|i| y.prefix(i)));
    out
}

fn c4_gromov() -> Check {
    let group = f2();
    let ball = group.ball(4);
    let mismatches: usize = ball
        .par_iter()
        .map(|x| {
            let mut bad = 0;
            for y in &ball {
                let seg = segment(x, y);
                for s in &ball {
                    let d = seg.iter().map(|v| v.distance(s)).min().expect("segments are nonempty");
                    bad += (group.gromov_product(x, y, s).doubled() != 2 * d as i64) as usize;
                }
            }
            bad
        })
        .sum();
    let triples = ball.len().pow(3);
    Check {
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches over {triples} triples"),
        rows: vec![row(4, format!("ball=4;triples={triples}"), "mismatches", mismatches as f64, 0)],
    }
}

fn c5_broken_geodesics() -> Check {
    let group = f2();
    let ball = group.ball(4);
    let (c0, c1) = (Q::from_integer(0), Q::from_integer(1));
    let on_segment = |a: &Word, b: &Word, c: &Word| a.distance(b) + b.distance(c) == a.distance(c);
    // Length 2 and 3: every sequence, library against the direct formula.
    let short: (usize, usize, usize) = ball
        .par_iter()
        .map(|x0| {
            let (mut checked, mut bad, mut hypothesis) = (0, 0, 0);
            for x1 in &ball {
                let r = group.broken_geodesic_check(&[x0.clone(), x1.clone()], c0, c1).expect("valid constants");
                checked += 1;
                bad += (r.hypothesis_holds != (x0 != x1) || (r.hypothesis_holds && !r.conclusion_holds)) as usize;
                for x2 in &ball {
                    let points = [x0.clone(), x1.clone(), x2.clone()];
                    let r = group.broken_geodesic_check(&points, c0, c1).expect("valid constants");
                    let hyp = x0 != x1 && x1 != x2 && on_segment(x0, x1, x2);
                    checked += 1;
                    hypothesis += hyp as usize;
                    bad += (r.hypothesis_holds != hyp || (hyp && !(r.conclusion_holds && on_segment(x0, x1, x2)))) as usize;
                }
            }
            (checked, bad, hypothesis)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    // Length 4: extend only sequences whose prefixes satisfy the hypothesis.
    let long: (usize, usize) = ball
        .par_iter()
        .map(|x0| {
            let (mut satisfied, mut bad) = (0, 0);
            for x1 in ball.iter().filter(|x1| *x1 != x0) {
                for x2 in ball.iter().filter(|x2| *x2 != x1 && on_segment(x0, x1, x2)) {
                    for x3 in ball.iter().filter(|x3| *x3 != x2 && on_segment(x1, x2, x3)) {
                        satisfied += 1;
                        let points = [x0.clone(), x1.clone(), x2.clone(), x3.clone()];
                        let direct = points.iter().all(|p| on_segment(x0, p, x3));
                        let r = group.broken_geodesic_check(&points, c0, c1).expect("valid constants");
                        bad += (!r.hypothesis_holds || !r.conclusion_holds || !direct) as usize;
                    }
                }
            }
            (satisfied, bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let bad = short.1 + long.1;
    Check {
        passed: bad == 0,
        detail: format!(
            "{} sequences of length <= 3 compared, {} length-4 sequences satisfy the hypothesis, {bad} failures",
            short.0, long.0
        ),
        rows: vec![
            row(5, "ball=4;length<=3", "hypothesis_sequences", short.2 as f64, 0),
            row(5, "ball=4;length=4", "hypothesis_sequences", long.0 as f64, 0),
            row(5, "ball=4", "failures", bad as f64, 0),
        ],
    }
}

fn c6_power_conjugacy() -> Check {
    let group = f2();
    let subgroups = oracle::small_subgroups(4);
    let ball = group.ball(4);
    let elements: Vec<Word> = ball.iter().filter(|w| !w.is_identity()).cloned().collect();
    // conjugates[f][m - 1][v] = v⁻¹ fᵐ v
    let conjugates: Vec<Vec<Vec<Word>>> = elements
        .iter()
        .map(|f| {
            (1..=8)
                .map(|m| {
                    let power = f.pow(m);
                    ball.iter().map(|v| v.inverse().mul(&power).mul(v)).collect()
                })
                .collect()
        })
        .collect();
    let (disagreements, witnesses): (usize, usize) = subgroups
        .par_iter()
        .map(|h| {
            let (mut bad, mut found) = (0, 0);
            for (f, table) in elements.iter().zip(&conjugates) {
                let brute = table.iter().position(|row| row.iter().any(|w| h.contains(w))).map(|i| i as u32 + 1);
                let decided = transverse::power_conjugate_into(h, f).expect("nontrivial element");
                match (&decided, brute) {
                    (None, None) => {}
                    (Some(pc), Some(m)) => {
                        found += 1;
                        let valid = h.contains(&pc.v.inverse().mul(&f.pow(pc.m as i64)).mul(&pc.v));
                        bad += (!valid || pc.m != m) as usize;
                    }
                    _ => bad += 1,
                }
            }
            (bad, found)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let pairs = subgroups.len() * elements.len();
    Check {
        passed: disagreements == 0,
        detail: format!("{} subgroups x {} elements, {witnesses} with a power conjugate in, {disagreements} disagreements", subgroups.len(), elements.len()),
        rows: vec![
            row(6, format!("subgroups={};elements={}", subgroups.len(), elements.len()), "pairs", pairs as f64, 0),
            row(6, "m<=8;radius=4", "witnesses", witnesses as f64, 0),
            row(6, "m<=8;radius=4", "disagreements", disagreements as f64, 0),
        ],
    }
}

fn c7_transverse() -> Check {
    let group = f2();
    let word = |s: &str| group.parse(s).expect("valid word");
    let g = word("ab");
    let mut passed = true;
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    for targets in [vec!["a"], vec!["a", "b"], vec!["ab"]] {
        let hs: Vec<SubgroupAutomaton> = targets
            .iter()
            .map(|t| SubgroupAutomaton::from_generators(&group, &[word(t)]).expect("valid"))
            .collect();
        let name = targets.join("|");
        let c = match transverse::construct_transverse(&hs, &g) {
            Ok(c) => c,
            Err(e) => {
                passed = false;
                detail.push(format!("{{{name}}}: {e}"));
                continue;
            }
        };
        let mut ok = true;
        let mut overlap = Vec::new();
        for (h, cert) in hs.iter().zip(&c.certificates) {
            ok &= cert.is_transverse() && cert.check(h).unwrap_or(false);
            ok &= oracle::power_conjugate_search(h, &c.f, 8, 4).is_none();
            let narrow = transverse::overlap_bound(h, &c.f, 3, 4, -8..=8).max_count();
            let wide = transverse::overlap_bound(h, &c.f, 3, 4, -16..=16).max_count();
            ok &= narrow == wide;
            overlap.push(wide);
        }
        passed &= ok;
        detail.push(format!("{{{name}}}: f = {}, overlaps {overlap:?}", c.f));
        let params = format!("targets={name};g={g};f={}", c.f);
        rows.push(row(7, params.clone(), "certified", ok as u8 as f64, 0));
        for (i, o) in overlap.iter().enumerate() {
            rows.push(row(7, format!("{params};target={i};e=3;radius=4"), "max_overlap", *o as f64, 0));
        }
    }
    Check { passed, detail: detail.join("; "), rows }
}

fn standard_pair(group: &FreeGroup, h: &str, k: &str, radius: usize) -> MixingPair {
    let sub = |s: &str| SubgroupAutomaton::from_generators(group, &[group.parse(s).expect("valid")]).expect("valid");
    MixingPair::new(sub(h), sub(k), group.ball(radius))
}

fn monotone_within(p: &[(f64, f64)], sigmas: f64) -> bool {
    p.windows(2).all(|w| w[1].0 + sigmas * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt() >= w[0].0)
}

fn c8_mixing(seed: u64) -> Check {
    let group = f2();
    let pair = standard_pair(&group, "a", "b", 2);
    let mu = StepMeasure::simple(&group);
    let estimates: Vec<_> = MIXING_SCHEDULE
        .iter()
        .map(|&n| mixing::estimate_mixing(&pair, &mu, n, 500, seed).expect("valid instance"))
        .collect();
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (e.p_hat, e.sigma())).collect();
    let monotone = monotone_within(&points, 2.0);
    let last = estimates.last().expect("nonempty").p_hat;
    let successes: Vec<usize> = estimates.iter().map(|e| e.successes).collect();
    let golden = seed != ACCEPTANCE_SEED || successes == GOLDEN_MIXING;
    let rows = estimates
        .iter()
        .map(|e| row(8, format!("n={};trials=500;window_radius=2", e.n), "p_hat", e.p_hat, seed).with_ci(e.ci_low, e.ci_high))
        .collect();
    Check {
        passed: monotone && last >= 0.9 && golden,
        detail: format!(
            "successes {successes:?}, nondecreasing within 2 sigma: {monotone}, p_160 = {last:.3}{}",
            if seed == ACCEPTANCE_SEED { format!(", golden match: {golden}") } else { String::new() }
        ),
        rows,
    }
}

fn c9_free_product(seed: u64) -> Check {
    let group = f2();
    let h = SubgroupAutomaton::from_generators(&group, &[group.parse("a").expect("valid")]).expect("valid");
    let e = mixing::free_product_experiment(&h, &StepMeasure::simple(&group), 100, 500, seed).expect("valid instance");
    let golden = seed != ACCEPTANCE_SEED || e.successes == GOLDEN_FREE_PRODUCT;
    Check {
        passed: e.p_hat >= 0.95 && golden,
        detail: format!("{} of 500 certified (p = {:.3})", e.successes, e.p_hat),
        rows: vec![row(9, "H=a;n=100;trials=500", "free_product_fraction", e.p_hat, seed).with_ci(e.ci_low, e.ci_high)],
    }
}

fn c10_joint(seed: u64) -> Check {
    let group = f2();
    let pairs = [standard_pair(&group, "a", "b", 1), standard_pair(&group, "ab", "ba", 1)];
    let mu = StepMeasure::simple(&group);
    let mut passed = true;
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    for n in MIXING_SCHEDULE {
        let j = mixing::joint_mixing(&pairs, &mu, n, 500, seed).expect("valid instance");
        let bound = 1.0 - j.marginals.iter().map(|m| 1.0 - m.p_hat).sum::<f64>() - 3.0 * j.joint.sigma();
        let ok = j.joint.p_hat >= bound;
        passed &= ok;
        detail.push(format!("n={n}: {:.3} >= {:.3}", j.joint.p_hat, bound));
        let params = format!("n={n};trials=500;window_radius=1");
        rows.push(row(10, params.clone(), "joint_p_hat", j.joint.p_hat, seed).with_ci(j.joint.ci_low, j.joint.ci_high));
        for (i, m) in j.marginals.iter().enumerate() {
            rows.push(row(10, params.clone(), &format!("marginal_{i}"), m.p_hat, seed));
        }
    }
    Check { passed, detail: detail.join(", "), rows }
}

fn c11_claims(seed: u64) -> Check {
    let mut r = instance_rng(seed, 11);
    let zz = ConeLabel::parse("zz").expect("label");
    let zz_inv = ConeLabel::parse("ZZ").expect("label");
    let mut failures: Vec<String> = Vec::new();
    let mut letters = [0usize; 3];
    // Claim 1: both cone equations, and pointwise at depth n + 2.
    let mut done = 0;
    while done < 50 {
        let n = r.random_range(2..=5);
        let u = ConeLabel::random_outside_f2(n, &mut r);
        let pivot = ConeLabel::pivot(n);
        if u == pivot {
            continue;
        }
        done += 1;
        let ok = (|| -> Result<bool, cantor::CantorError> {
            let f = cantor::claim1_f(&u)?;
            letters[0] += f.len();
            let mut ok = cantor::sends_cone(&f, &u, &zz, n + 64)? && cantor::sends_cone(&f, &pivot, &zz_inv, n + 64)?;
            for (from, to) in [(&u, &zz), (&pivot, &zz_inv)] {
                for w in cantor::order_cones(from, 2) {
                    ok &= matches!(cantor::apply(&f, &w, 0), Applied::Label(x) if x.starts_with(to));
                }
            }
            Ok(ok)
        })();
        if ok != Ok(true) {
            failures.push(format!("claim1 {u}"));
        }
    }
    // Claim 2: swap, and 100 sampled points of depth n + 3 outside both cones.
    for _ in 0..50 {
        let n = r.random_range(2..=5);
        let u = ConeLabel::random_outside_f2(n, &mut r);
        let pivot = ConeLabel::pivot(n);
        let mut samples = Vec::new();
        while samples.len() < 100 {
            let mut p = ConeLabel::random_outside_f2(n + 3, &mut r);
            if r.random::<bool>() {
                // Also sample points inside F(x, y) cones.
                let head = random_word(2, n, &mut r);
                let tail: Vec<Letter> = p.letters()[n..].to_vec();
                let mut all = head.letters().to_vec();
                all.extend(tail);
                let w = Word::reduce(all);
                if w.len() != n + 3 {
                    continue;
                }
                p = ConeLabel::from_word(w).expect("nonempty");
            }
            if !p.starts_with(&u) && !p.starts_with(&pivot) {
                samples.push(p);
            }
        }
        let ok = (|| -> Result<bool, cantor::CantorError> {
            let g = cantor::claim2_g(&u)?;
            letters[1] += g.len();
            let mut ok = cantor::sends_cone(&g, &u, &pivot, n + 64)? && cantor::sends_cone(&g, &pivot, &u, n + 64)?;
            for p in &samples {
                ok &= cantor::image_antichain(&g, &ConeAntichain::single(p.clone()), n + 64)? == ConeAntichain::single(p.clone());
            }
            Ok(ok)
        })();
        if ok != Ok(true) {
            failures.push(format!("claim2 {u}"));
        }
    }
    // Claim 3: up to 3 random pairs of distinct labels.
    for _ in 0..50 {
        let n = r.random_range(2..=5);
        let k = r.random_range(1..=3);
        let draw = |r: &mut TrialRng| {
            let mut set = BTreeSet::new();
            while set.len() < k {
                set.insert(ConeLabel::random_outside_f2(n, r));
            }
            let mut v: Vec<ConeLabel> = set.into_iter().collect();
            for i in (1..v.len()).rev() {
                v.swap(i, r.random_range(0..=i));
            }
            v
        };
        let us = draw(&mut r);
        let vs = draw(&mut r);
        let pairs: Vec<(ConeLabel, ConeLabel)> = us.into_iter().zip(vs).collect();
        let ok = (|| -> Result<bool, cantor::CantorError> {
            let g = cantor::claim3_witness(&pairs, n)?;
            letters[2] += g.len();
            let mut ok = true;
            for (u, v) in &pairs {
                ok &= cantor::sends_cone(&g, u, v, n + 64)?;
            }
            Ok(ok)
        })();
        if ok != Ok(true) {
            let text: Vec<String> = pairs.iter().map(|(u, v)| format!("{u}->{v}")).collect();
            failures.push(format!("claim3 {}", text.join(",")));
        }
    }
    let mut detail = format!("150 instances, {} failures", failures.len());
    if !failures.is_empty() {
        write!(detail, ": {}", failures.join("; ")).unwrap();
    }
    let mut rows: Vec<ResultRow> = (0..3)
        .map(|i| row(11, format!("claim={};instances=50", i + 1), "total_letters", letters[i] as f64, seed))
        .collect();
    rows.push(row(11, "instances=150", "failures", failures.len() as f64, seed));
    Check { passed: failures.is_empty(), detail, rows }
}

fn c12_transience(seed: u64) -> Check {
    let exact = cantor::hit_probability_exact();
    let iterated = oracle::hit_probability_iteration(200);
    let exact_ok = exact.minimal == Q::new(1, 3) && exact.roots.1 == Q::from_integer(1) && (iterated - 1.0 / 3.0).abs() < 1e-12;
    let h = cantor::hitting_estimate(100_000, 10_000, seed);
    let mc_ok = (h.p_hat - 1.0 / 3.0).abs() <= 0.01;
    let s = cantor::superharmonic_check(8);
    Check {
        passed: exact_ok && mc_ok && s.holds(),
        detail: format!(
            "exact {} (iteration {iterated:.12}), Monte Carlo {:.4}, superharmonic on {} vertices: {}",
            exact.minimal,
            h.p_hat,
            s.vertices,
            s.holds()
        ),
        rows: vec![
            row(12, "exact", "hit_probability", 1.0 / 3.0, seed),
            row(12, "value_iteration=200", "hit_probability", iterated, seed),
            row(12, "trials=100000;horizon=10000", "hit_probability", h.p_hat, seed).with_ci(h.ci_low, h.ci_high),
            row(12, "radius=8", "superharmonic", s.holds() as u8 as f64, seed),
        ],
    }
}

fn c13_non_mixing(seed: u64) -> Check {
    let p_letter = Q::new(1, 8);
    let mut passed = true;
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    for n in [10, 50, 100] {
        let q = cantor::estimate_qn(p_letter, n, 10_000, 256, seed).expect("valid parameters");
        passed &= q.p_hat <= 0.35 && q.cap_exceeded == 0;
        detail.push(format!("q_{n} = {:.4}", q.p_hat));
        rows.push(row(13, format!("p_letter=1/8;n={n};trials=10000"), "q_n", q.p_hat, seed).with_ci(q.ci_low, q.ci_high));
    }
    let group = f2();
    let contrast = mixing::estimate_mixing(&standard_pair(&group, "a", "b", 2), &StepMeasure::simple(&group), 160, 500, seed)
        .expect("valid instance");
    passed &= contrast.p_hat >= 0.9;
    detail.push(format!("against mixing p_160 = {:.3}", contrast.p_hat));
    rows.push(row(13, "standard_instance;n=160;trials=500", "p_hat", contrast.p_hat, seed).with_ci(contrast.ci_low, contrast.ci_high));
    Check { passed, detail: detail.join(", "), rows }
}
