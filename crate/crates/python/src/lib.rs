//! Python bindings for `hypmix`.
//!
//! Words are strings in the usual grammar (`a`..`z`, uppercase inverses,
//! `"1"` for the identity); cone labels use `x`, `y`, `z`. Errors from the
//! library surface as `ValueError`.

use std::path::Path;

use hypmix::cantor::{self, ConeLabel};
use hypmix::freegroup::{FreeGroup, Word, Q};
use hypmix::harness::{self, ExperimentConfig, Format};
use hypmix::mixing::{estimate_mixing, MixingEstimate, MixingPair};
use hypmix::stallings::{Index, SubgroupAutomaton};
use hypmix::transverse;
use hypmix::walks::{drift_estimate, StepMeasure};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn group(rank: usize) -> PyResult<FreeGroup> {
    FreeGroup::new(rank).map_err(err)
}

fn words(g: &FreeGroup, texts: &[String]) -> PyResult<Vec<Word>> {
    texts.iter().map(|t| g.parse(t).map_err(err)).collect()
}

fn label(text: &str) -> PyResult<ConeLabel> {
    ConeLabel::parse(text).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (word, rank = 2))]
fn reduce(word: &str, rank: usize) -> PyResult<String> {
    Ok(group(rank)?.parse(word).map_err(err)?.to_string())
}

#[pyfunction]
#[pyo3(signature = (u, v, rank = 2))]
fn multiply(u: &str, v: &str, rank: usize) -> PyResult<String> {
    let g = group(rank)?;
    Ok(g.parse(u).map_err(err)?.mul(&g.parse(v).map_err(err)?).to_string())
}

#[pyfunction]
#[pyo3(signature = (word, rank = 2))]
fn inverse(word: &str, rank: usize) -> PyResult<String> {
    Ok(group(rank)?.parse(word).map_err(err)?.inverse().to_string())
}

/// A finitely generated subgroup, held as its folded core graph.
#[pyclass(name = "Subgroup", frozen)]
struct PySubgroup {
    inner: SubgroupAutomaton,
}

#[pymethods]
impl PySubgroup {
    #[new]
    #[pyo3(signature = (generators, rank = 2))]
    fn new(generators: Vec<String>, rank: usize) -> PyResult<Self> {
        let g = group(rank)?;
        let gens = words(&g, &generators)?;
        Ok(PySubgroup { inner: SubgroupAutomaton::from_generators(&g, &gens).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (text, rank = 2))]
    fn from_text(text: &str, rank: usize) -> PyResult<Self> {
        Ok(PySubgroup { inner: SubgroupAutomaton::from_text(&group(rank)?, text).map_err(err)? })
    }

    fn contains(&self, word: &str) -> PyResult<bool> {
        Ok(self.inner.contains(&self.inner.group().parse(word).map_err(err)?))
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// `None` for infinite index.
    fn index(&self) -> Option<usize> {
        match self.inner.index() {
            Index::Finite(n) => Some(n),
            Index::Infinite => None,
        }
    }

    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    fn generators(&self) -> Vec<String> {
        self.inner.generators().iter().map(Word::to_string).collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn conjugate(&self, g: &str) -> PyResult<Self> {
        let w = self.inner.group().parse(g).map_err(err)?;
        Ok(PySubgroup { inner: self.inner.conjugate(&w).map_err(err)? })
    }

    fn intersect(&self, other: &PySubgroup) -> PyResult<Self> {
        Ok(PySubgroup { inner: self.inner.intersect(&other.inner).map_err(err)? })
    }

    fn join(&self, other: &PySubgroup) -> PyResult<Self> {
        Ok(PySubgroup { inner: self.inner.join(&other.inner).map_err(err)? })
    }

    fn distance_to_orbit(&self, word: &str) -> PyResult<usize> {
        Ok(self.inner.distance_to_orbit(&self.inner.group().parse(word).map_err(err)?))
    }

    fn is_transverse(&self, f: &str) -> PyResult<bool> {
        let w = self.inner.group().parse(f).map_err(err)?;
        transverse::is_transverse(&self.inner, &w).map_err(err)
    }

    /// `(m, v)` with `fᵐ ∈ vHv⁻¹` and `m` least, or `None`.
    fn power_conjugate_into(&self, f: &str) -> PyResult<Option<(u32, String)>> {
        let w = self.inner.group().parse(f).map_err(err)?;
        Ok(transverse::power_conjugate_into(&self.inner, &w).map_err(err)?.map(|pc| (pc.m, pc.v.to_string())))
    }

    fn certify_free_product(&self, g: &str) -> PyResult<bool> {
        let w = self.inner.group().parse(g).map_err(err)?;
        self.inner.certify_free_product(&w).map_err(err)
    }

    fn __eq__(&self, other: &PySubgroup) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Subgroup({:?}, rank={})", self.generators(), self.inner.rank_of_group())
    }
}

/// The element `gⁿa` transverse to every target, as `(f, n, a)`.
#[pyfunction]
fn construct_transverse(targets: Vec<PyRef<'_, PySubgroup>>, g: &str) -> PyResult<(String, u32, String)> {
    let Some(first) = targets.first() else {
        return Err(PyValueError::new_err("at least one target is required"));
    };
    let w = first.inner.group().parse(g).map_err(err)?;
    let hs: Vec<SubgroupAutomaton> = targets.iter().map(|t| t.inner.clone()).collect();
    let c = transverse::construct_transverse(&hs, &w).map_err(err)?;
    Ok((c.f.to_string(), c.n, c.a.to_string()))
}

#[pyfunction]
#[pyo3(signature = (rank, n, trials, seed = 1, measure = "uniform"))]
fn drift<'py>(py: Python<'py>, rank: usize, n: usize, trials: usize, seed: u64, measure: &str) -> PyResult<Bound<'py, PyDict>> {
    let g = group(rank)?;
    let mu = harness::parse_measure(&g, measure, "measure").map_err(err)?;
    let d = py.detach(|| drift_estimate(&mu, n, trials, seed, true)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("estimate", d.estimate)?;
    out.set_item("half_width", d.half_width)?;
    out.set_item("n", d.n)?;
    out.set_item("trials", d.trials)?;
    out.set_item("seed", d.seed)?;
    Ok(out)
}

fn mixing_dict<'py>(py: Python<'py>, e: &MixingEstimate) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("n", e.n)?;
    out.set_item("trials", e.trials)?;
    out.set_item("successes", e.successes)?;
    out.set_item("p_hat", e.p_hat)?;
    out.set_item("ci_low", e.ci_low)?;
    out.set_item("ci_high", e.ci_high)?;
    out.set_item("seed", e.seed)?;
    Ok(out)
}

/// Certified lower bound for `P(w_n ∈ N(U, V))`, one dict per `n`.
#[pyfunction]
#[pyo3(signature = (h, k, n_list, trials, seed = 1, window_radius = 2, rank = 2))]
#[allow(clippy::too_many_arguments)]
fn mixing<'py>(
    py: Python<'py>,
    h: Vec<String>,
    k: Vec<String>,
    n_list: Vec<usize>,
    trials: usize,
    seed: u64,
    window_radius: usize,
    rank: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let g = group(rank)?;
    let hh = SubgroupAutomaton::from_generators(&g, &words(&g, &h)?).map_err(err)?;
    let kk = SubgroupAutomaton::from_generators(&g, &words(&g, &k)?).map_err(err)?;
    let pair = MixingPair::new(hh, kk, g.ball(window_radius));
    let mu = StepMeasure::simple(&g);
    let estimates: Vec<MixingEstimate> = py
        .detach(|| n_list.iter().map(|&n| estimate_mixing(&pair, &mu, n, trials, seed)).collect::<Result<_, _>>())
        .map_err(err)?;
    estimates.iter().map(|e| mixing_dict(py, e)).collect()
}

#[pyfunction]
fn claim1(u: &str) -> PyResult<String> {
    Ok(cantor::claim1_f(&label(u)?).map_err(err)?.to_string())
}

#[pyfunction]
fn claim2(u: &str) -> PyResult<String> {
    Ok(cantor::claim2_g(&label(u)?).map_err(err)?.to_string())
}

#[pyfunction]
fn claim3(pairs: Vec<(String, String)>, n: usize) -> PyResult<String> {
    let pairs: Vec<(ConeLabel, ConeLabel)> =
        pairs.iter().map(|(u, v)| Ok((label(u)?, label(v)?))).collect::<PyResult<_>>()?;
    Ok(cantor::claim3_witness(&pairs, n).map_err(err)?.to_string())
}

#[pyfunction]
fn xi(u: &str, v: &str, w: &str) -> PyResult<String> {
    Ok(cantor::xi(&label(u)?, &label(v)?, &label(w)?).map_err(err)?.to_string())
}

#[pyfunction]
#[pyo3(signature = (n, trials, p_letter = "1/8", depth_cap = 256, seed = 1))]
fn estimate_qn<'py>(
    py: Python<'py>,
    n: usize,
    trials: usize,
    p_letter: &str,
    depth_cap: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p: Q = p_letter.parse().map_err(|_| PyValueError::new_err(format!("bad probability {p_letter:?}")))?;
    let e = py.detach(|| cantor::estimate_qn(p, n, trials, depth_cap, seed)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("n", e.n)?;
    out.set_item("trials", e.trials)?;
    out.set_item("successes", e.successes)?;
    out.set_item("cap_exceeded", e.cap_exceeded)?;
    out.set_item("p_hat", e.p_hat)?;
    out.set_item("ci_low", e.ci_low)?;
    out.set_item("ci_high", e.ci_high)?;
    out.set_item("seed", e.seed)?;
    Ok(out)
}

/// Runs a TOML config and returns the rendered output.
#[pyfunction]
#[pyo3(signature = (path, format = "csv"))]
fn run_config(py: Python<'_>, path: &str, format: &str) -> PyResult<String> {
    let config = ExperimentConfig::load(Path::new(path)).map_err(err)?;
    let format: Format = format.parse().map_err(err)?;
    let out = py.detach(|| harness::run_full(&config)).map_err(err)?;
    Ok(harness::render(&config, &out, format))
}

/// `(id, passed, line)` for each requested acceptance criterion.
#[pyfunction]
#[pyo3(signature = (criteria, seed = 1))]
fn selftest(py: Python<'_>, criteria: Vec<u32>, seed: u64) -> Vec<(u32, bool, String)> {
    py.detach(|| harness::run_acceptance(&criteria, seed))
        .into_iter()
        .map(|r| (r.id, r.passed, r.line()))
        .collect()
}

#[pymodule]
fn pyhypmix(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySubgroup>()?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(multiply, m)?)?;
    m.add_function(wrap_pyfunction!(inverse, m)?)?;
    m.add_function(wrap_pyfunction!(construct_transverse, m)?)?;
    m.add_function(wrap_pyfunction!(drift, m)?)?;
    m.add_function(wrap_pyfunction!(mixing, m)?)?;
    m.add_function(wrap_pyfunction!(claim1, m)?)?;
    m.add_function(wrap_pyfunction!(claim2, m)?)?;
    m.add_function(wrap_pyfunction!(claim3, m)?)?;
    m.add_function(wrap_pyfunction!(xi, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_qn, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
