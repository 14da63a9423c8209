//! Experiment configuration, dispatch and result files.
//!
//! A config is a TOML file with top-level run settings and one section
//! named after the experiment kind:
//!
//! ```toml
//! kind = "drift"
//! seed = 1
//!
//! [drift]
//! rank = 2
//! n = 10000
//! trials = 2000
//! ```

pub mod criteria;

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{self, ConeLabel};
use crate::freegroup::{FreeGroup, Q, Word};
use crate::mixing::{self, MixingEstimate, MixingPair};
use crate::stallings::SubgroupAutomaton;
use crate::transverse;
use crate::walks::{self, StepMeasure};

pub use criteria::{run_acceptance, CriterionResult, ACCEPTANCE_SEED};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{context}: {message}")]
    Module { context: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> HarnessError {
    HarnessError::Validation { field: field.into(), message: message.to_string() }
}

fn module_error(context: &str, e: impl ToString) -> HarnessError {
    HarnessError::Module { context: context.to_string(), message: e.to_string() }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Walk,
    Drift,
    Mix,
    Freeprod,
    Transverse,
    Cantor,
    Selftest,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Walk => "walk",
            Kind::Drift => "drift",
            Kind::Mix => "mix",
            Kind::Freeprod => "freeprod",
            Kind::Transverse => "transverse",
            Kind::Cantor => "cantor",
            Kind::Selftest => "selftest",
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Format, HarnessError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(invalid("format", format!("expected csv or json, got {s:?}"))),
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_rank() -> usize {
    2
}

fn default_measure() -> String {
    "uniform".into()
}

fn default_trials() -> usize {
    500
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WalkParams {
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_measure")]
    pub measure: String,
    pub n: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DriftParams {
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_measure")]
    pub measure: String,
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairParams {
    pub h: Vec<String>,
    pub k: Vec<String>,
    pub window_radius: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixParams {
    #[serde(default = "default_rank")]
    pub rank: usize,
    pub h: Vec<String>,
    pub k: Vec<String>,
    pub window_radius: usize,
    #[serde(default = "default_measure")]
    pub measure: String,
    pub n_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// More pairs for a joint estimate; the first pair is `(h, k)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_pairs: Vec<PairParams>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FreeprodParams {
    #[serde(default = "default_rank")]
    pub rank: usize,
    pub h: Vec<String>,
    #[serde(default = "default_measure")]
    pub measure: String,
    pub n_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Also estimate how often `random_k` independent walks generate a
    /// free group of rank `random_k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_k: Option<usize>,
}

fn default_overlap_e() -> usize {
    3
}

fn default_overlap_radius() -> usize {
    4
}

fn default_overlap_range() -> i64 {
    8
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransverseParams {
    #[serde(default = "default_rank")]
    pub rank: usize,
    /// Generators of each target subgroup.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subgroups: Vec<Vec<String>>,
    /// A file with one target subgroup per line, generators separated by
    /// commas or spaces. Read in addition to `subgroups`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroups_file: Option<String>,
    pub g: String,
    #[serde(default = "default_overlap_e")]
    pub overlap_e: usize,
    #[serde(default = "default_overlap_radius")]
    pub overlap_radius: usize,
    /// Exponents `-r..=r` in the overlap count.
    #[serde(default = "default_overlap_range")]
    pub overlap_range: i64,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CantorMode {
    Claim1,
    Claim2,
    Claim3,
    Qn,
    Hitting,
    Superharmonic,
}

fn default_p_letter() -> String {
    "1/8".into()
}

fn default_qn_list() -> Vec<usize> {
    vec![10, 50, 100]
}

fn default_qn_trials() -> usize {
    10_000
}

fn default_depth_cap() -> usize {
    256
}

fn default_horizon() -> usize {
    10_000
}

fn default_radius() -> usize {
    8
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CantorParams {
    pub mode: CantorMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    /// `[u, v]` label pairs for claim 3.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "default_p_letter")]
    pub p_letter: String,
    #[serde(default = "default_qn_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_qn_trials")]
    pub trials: usize,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_radius")]
    pub radius: usize,
}

fn all_criteria() -> Vec<u32> {
    (1..=14).collect()
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SelftestParams {
    #[serde(default = "all_criteria")]
    pub criteria: Vec<u32>,
}

impl Default for SelftestParams {
    fn default() -> SelftestParams {
        SelftestParams { criteria: all_criteria() }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<MixParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freeprod: Option<FreeprodParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse: Option<TransverseParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantor: Option<CantorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selftest: Option<SelftestParams>,
}

impl ExperimentConfig {
    pub fn new(kind: Kind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            seed: default_seed(),
            threads: None,
            output: None,
            format: Format::Csv,
            walk: None,
            drift: None,
            mix: None,
            freeprod: None,
            transverse: None,
            cantor: None,
            selftest: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<ExperimentConfig, HarnessError> {
        toml::from_str(text).map_err(|e| invalid("config", e.message()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io { path: path.display().to_string(), message: e.to_string() })?;
        ExperimentConfig::from_toml(&text)
    }

    fn section<'a, T>(&self, value: &'a Option<T>) -> Result<&'a T, HarnessError> {
        value
            .as_ref()
            .ok_or_else(|| invalid(self.kind.name(), format!("missing [{}] section", self.kind.name())))
    }

    /// Checks every field that can be checked without running anything.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        match self.kind {
            Kind::Walk => {
                let p = self.section(&self.walk)?;
                parse_measure(&group("walk.rank", p.rank)?, &p.measure, "walk.measure")?;
            }
            Kind::Drift => {
                let p = self.section(&self.drift)?;
                parse_measure(&group("drift.rank", p.rank)?, &p.measure, "drift.measure")?;
                positive("drift.trials", p.trials)?;
            }
            Kind::Mix => {
                self.mix_inputs()?;
            }
            Kind::Freeprod => {
                self.freeprod_inputs()?;
            }
            Kind::Transverse => {
                self.transverse_inputs()?;
            }
            Kind::Cantor => {
                self.cantor_inputs()?;
            }
            Kind::Selftest => {
                if let Some(p) = &self.selftest {
                    for &c in &p.criteria {
                        if !(1..=14).contains(&c) {
                            return Err(invalid("selftest.criteria", format!("no criterion {c}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn mix_inputs(&self) -> Result<(Vec<MixingPair>, StepMeasure, &MixParams), HarnessError> {
        let p = self.section(&self.mix)?;
        let g = group("mix.rank", p.rank)?;
        let mu = parse_measure(&g, &p.measure, "mix.measure")?;
        positive("mix.trials", p.trials)?;
        if p.n_list.is_empty() {
            return Err(invalid("mix.n_list", "must not be empty"));
        }
        let mut pairs = vec![pair(&g, &p.h, &p.k, p.window_radius, "mix")?];
        for (i, extra) in p.extra_pairs.iter().enumerate() {
            pairs.push(pair(&g, &extra.h, &extra.k, extra.window_radius, &format!("mix.extra_pairs[{i}]"))?);
        }
        Ok((pairs, mu, p))
    }

    fn freeprod_inputs(&self) -> Result<(SubgroupAutomaton, StepMeasure, &FreeprodParams), HarnessError> {
        let p = self.section(&self.freeprod)?;
        let g = group("freeprod.rank", p.rank)?;
        let mu = parse_measure(&g, &p.measure, "freeprod.measure")?;
        positive("freeprod.trials", p.trials)?;
        let h = subgroup(&g, &p.h, "freeprod.h")?;
        if h.index().is_finite() {
            return Err(invalid("freeprod.h", "subgroup has finite index"));
        }
        if p.random_k == Some(0) {
            return Err(invalid("freeprod.random_k", "must be at least 1"));
        }
        Ok((h, mu, p))
    }

    fn transverse_inputs(&self) -> Result<(Vec<SubgroupAutomaton>, Word, &TransverseParams), HarnessError> {
        let p = self.section(&self.transverse)?;
        let g = group("transverse.rank", p.rank)?;
        let mut targets = Vec::new();
        for (i, gens) in p.subgroups.iter().enumerate() {
            targets.push(subgroup(&g, gens, &format!("transverse.subgroups[{i}]"))?);
        }
        if let Some(path) = &p.subgroups_file {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.clone(), message: e.to_string() })?;
            targets.extend(parse_subgroups_file(&g, &text)?);
        }
        if targets.is_empty() {
            return Err(invalid("transverse.subgroups", "no target subgroups given"));
        }
        for (i, h) in targets.iter().enumerate() {
            if h.index().is_finite() {
                return Err(invalid(format!("transverse.subgroups[{i}]"), "subgroup has finite index"));
            }
        }
        let element = word(&g, &p.g, "transverse.g")?;
        if element.is_identity() {
            return Err(invalid("transverse.g", "must be nontrivial"));
        }
        Ok((targets, element, p))
    }

    fn cantor_inputs(&self) -> Result<(&CantorParams, Q), HarnessError> {
        let p = self.section(&self.cantor)?;
        let p_letter = Q::from_str(&p.p_letter).map_err(|e| invalid("cantor.p_letter", e))?;
        if p_letter < Q::from_integer(0) || p_letter * 4 > Q::from_integer(1) {
            return Err(invalid("cantor.p_letter", "need 0 <= 4 p_letter <= 1"));
        }
        match p.mode {
            CantorMode::Claim1 | CantorMode::Claim2 => {
                let u = p.u.as_ref().ok_or_else(|| invalid("cantor.u", "required for claims 1 and 2"))?;
                ConeLabel::parse(u).map_err(|e| invalid("cantor.u", e))?;
            }
            CantorMode::Claim3 => {
                if p.pairs.is_empty() {
                    return Err(invalid("cantor.pairs", "required for claim 3"));
                }
                for (i, [u, v]) in p.pairs.iter().enumerate() {
                    ConeLabel::parse(u).map_err(|e| invalid(format!("cantor.pairs[{i}]"), e))?;
                    ConeLabel::parse(v).map_err(|e| invalid(format!("cantor.pairs[{i}]"), e))?;
                }
            }
            CantorMode::Qn => {
                positive("cantor.trials", p.trials)?;
                if p.n_list.is_empty() {
                    return Err(invalid("cantor.n_list", "must not be empty"));
                }
            }
            CantorMode::Hitting => positive("cantor.trials", p.trials)?,
            CantorMode::Superharmonic => positive("cantor.radius", p.radius)?,
        }
        Ok((p, p_letter))
    }
}

fn positive(field: &str, value: usize) -> Result<(), HarnessError> {
    if value == 0 {
        Err(invalid(field, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn group(field: &str, rank: usize) -> Result<FreeGroup, HarnessError> {
    FreeGroup::new(rank).map_err(|e| invalid(field, e))
}

fn word(g: &FreeGroup, text: &str, field: &str) -> Result<Word, HarnessError> {
    g.parse(text).map_err(|e| invalid(field, e))
}

fn subgroup(g: &FreeGroup, gens: &[String], field: &str) -> Result<SubgroupAutomaton, HarnessError> {
    let words: Vec<Word> = gens
        .iter()
        .enumerate()
        .map(|(i, s)| word(g, s, &format!("{field}[{i}]")))
        .collect::<Result<_, _>>()?;
    SubgroupAutomaton::from_generators(g, &words).map_err(|e| invalid(field, e))
}

fn pair(g: &FreeGroup, h: &[String], k: &[String], radius: usize, field: &str) -> Result<MixingPair, HarnessError> {
    let h = subgroup(g, h, &format!("{field}.h"))?;
    let k = subgroup(g, k, &format!("{field}.k"))?;
    for (name, s) in [("h", &h), ("k", &k)] {
        if s.index().is_finite() {
            return Err(invalid(format!("{field}.{name}"), "subgroup has finite index"));
        }
    }
    Ok(MixingPair::new(h, k, g.ball(radius)))
}

/// One subgroup per line, generators separated by commas or whitespace;
/// blank lines and lines starting with `#` are skipped.
pub fn parse_subgroups_file(g: &FreeGroup, text: &str) -> Result<Vec<SubgroupAutomaton>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let gens: Vec<String> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(String::from).collect();
        out.push(subgroup(g, &gens, &format!("subgroups line {}", i + 1))?);
    }
    Ok(out)
}

/// `uniform` (the simple walk), `lazy:<hold>` (simple walk holding with
/// probability `hold`), or explicit weights such as `a:1/4,A:1/4,b:1/2`.
pub fn parse_measure(g: &FreeGroup, text: &str, field: &str) -> Result<StepMeasure, HarnessError> {
    let text = text.trim();
    let generators: Vec<Word> = g.letters().map(Word::letter).collect();
    if text == "uniform" || text == "simple" {
        return Ok(StepMeasure::simple(g));
    }
    if let Some(hold) = text.strip_prefix("lazy:") {
        let hold = BigRational::from_str(hold.trim()).map_err(|e| invalid(field, e))?;
        return StepMeasure::lazy_uniform_on(g, &generators, hold).map_err(|e| invalid(field, e));
    }
    let mut weights = Vec::new();
    for part in text.split(',') {
        let (w, p) = part
            .split_once(':')
            .ok_or_else(|| invalid(field, format!("expected word:weight, got {part:?}")))?;
        let w = word(g, w.trim(), field)?;
        let p = BigRational::from_str(p.trim()).map_err(|e| invalid(field, e))?;
        weights.push((w, p));
    }
    StepMeasure::from_weights(g, weights).map_err(|e| invalid(field, e))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub params: String,
    pub metric: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(experiment: &str, params: impl Into<String>, metric: &str, value: f64, seed: u64) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            params: params.into(),
            metric: metric.into(),
            value,
            ci_low: value,
            ci_high: value,
            seed,
        }
    }

    pub fn with_ci(mut self, low: f64, high: f64) -> ResultRow {
        self.ci_low = low;
        self.ci_high = high;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.ci_low.is_finite() && self.ci_high.is_finite()
    }
}

/// CSV with a header line, or a JSON array of flat objects.
pub fn emit(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => to_csv(rows, &["experiment", "params", "metric", "value", "ci_low", "ci_high", "seed"]),
        Format::Json => serde_json::to_string_pretty(rows).expect("rows serialize") + "\n",
    }
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> String {
    let mut writer = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.serialize(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf-8")
}

fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, HarnessError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| invalid("csv", e))
}

/// Inverse of [`emit`]; also accepts files written by [`render`].
pub fn parse(text: &str, format: Format) -> Result<Vec<ResultRow>, HarnessError> {
    match format {
        Format::Csv => from_csv(text),
        Format::Json => {
            let value: serde_json::Value = serde_json::from_str(text).map_err(|e| invalid("json", e))?;
            let rows = match value {
                serde_json::Value::Object(mut map) => map.remove("rows").unwrap_or_default(),
                other => other,
            };
            serde_json::from_value(rows).map_err(|e| invalid("json", e))
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MixingRow {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl From<&MixingEstimate> for MixingRow {
    fn from(e: &MixingEstimate) -> MixingRow {
        MixingRow { n: e.n, trials: e.trials, successes: e.successes, p_hat: e.p_hat, ci_low: e.ci_low, ci_high: e.ci_high, seed: e.seed }
    }
}

pub fn emit_mixing(estimates: &[MixingEstimate], format: Format) -> String {
    let rows: Vec<MixingRow> = estimates.iter().map(MixingRow::from).collect();
    match format {
        Format::Csv => to_csv(&rows, &["n", "trials", "successes", "p_hat", "ci_low", "ci_high", "seed"]),
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
    }
}

pub fn parse_mixing(text: &str) -> Result<Vec<MixingRow>, HarnessError> {
    from_csv(text)
}

/// Everything a run produces besides its rows.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// Per-n estimates of a `mix` run, in the mixing table layout.
    pub mixing: Vec<MixingEstimate>,
    /// Human-readable account: claim transcripts, constructions.
    pub transcript: String,
    /// Transversality certificates of a `transverse` run.
    pub certificates: Option<String>,
    pub acceptance: Vec<CriterionResult>,
    pub wall_time: f64,
}

impl RunOutput {
    pub fn acceptance_passed(&self) -> bool {
        self.acceptance.iter().all(|c| c.passed)
    }
}

/// Dispatches to the owning module, inside a pool of `threads` workers when
/// set. Results do not depend on the worker count.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    Ok(run_full(config)?.rows)
}

pub fn run_full(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let mut out = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid("threads", e))?
            .install(|| dispatch(config)),
        None => dispatch(config),
    }?;
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

fn dispatch(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let seed = config.seed;
    let mut out = RunOutput::default();
    match config.kind {
        Kind::Walk => {
            let p = config.section(&config.walk)?;
            let mu = parse_measure(&group("walk.rank", p.rank)?, &p.measure, "walk.measure")?;
            let trajectory = walks::sample_walk(&mu, p.n, seed);
            for (i, w) in trajectory.positions().iter().enumerate() {
                out.rows.push(ResultRow::new("walk", format!("step={i};position={w}"), "length", w.len() as f64, seed));
            }
        }
        Kind::Drift => {
            let p = config.section(&config.drift)?;
            let mu = parse_measure(&group("drift.rank", p.rank)?, &p.measure, "drift.measure")?;
            let d = walks::drift_estimate(&mu, p.n, p.trials, seed, true).map_err(|e| module_error("drift", e))?;
            out.rows.push(
                ResultRow::new("drift", format!("k={};n={};trials={};measure={}", p.rank, p.n, p.trials, p.measure), "drift", d.estimate, seed)
                    .with_ci(d.estimate - d.half_width, d.estimate + d.half_width),
            );
        }
        Kind::Mix => {
            let (pairs, mu, p) = config.mix_inputs()?;
            for &n in &p.n_list {
                let joint = mixing::joint_mixing(&pairs, &mu, n, p.trials, seed).map_err(|e| module_error("mix", e))?;
                let params = format!("n={n};trials={};window_radius={}", p.trials, p.window_radius);
                let e = &joint.joint;
                let metric = if pairs.len() == 1 { "p_hat" } else { "joint_p_hat" };
                out.rows.push(ResultRow::new("mix", params.clone(), metric, e.p_hat, seed).with_ci(e.ci_low, e.ci_high));
                if pairs.len() > 1 {
                    for (i, m) in joint.marginals.iter().enumerate() {
                        out.rows.push(ResultRow::new("mix", params.clone(), &format!("marginal_{i}"), m.p_hat, seed).with_ci(m.ci_low, m.ci_high));
                    }
                }
                out.mixing.push(joint.joint);
            }
        }
        Kind::Freeprod => {
            let (h, mu, p) = config.freeprod_inputs()?;
            for &n in &p.n_list {
                let e = mixing::free_product_experiment(&h, &mu, n, p.trials, seed).map_err(|e| module_error("freeprod", e))?;
                let params = format!("n={n};trials={}", p.trials);
                out.rows.push(ResultRow::new("freeprod", params.clone(), "free_product_fraction", e.p_hat, seed).with_ci(e.ci_low, e.ci_high));
                if let Some(k) = p.random_k {
                    let r = mixing::random_subgroup_experiment(&mu, k, n, p.trials, seed).map_err(|e| module_error("freeprod", e))?;
                    out.rows.push(ResultRow::new("freeprod", format!("{params};k={k}"), "rank_k_fraction", r.p_hat, seed).with_ci(r.ci_low, r.ci_high));
                }
            }
        }
        Kind::Transverse => {
            let (targets, g, p) = config.transverse_inputs()?;
            let c = transverse::construct_transverse(&targets, &g).map_err(|e| module_error("transverse", e))?;
            let params = format!("g={g};f={}", c.f);
            out.rows.push(ResultRow::new("transverse", params.clone(), "exponent", c.n as f64, seed));
            out.rows.push(ResultRow::new("transverse", params.clone(), "auxiliary_length", c.a.len() as f64, seed));
            out.rows.push(ResultRow::new("transverse", params.clone(), "element_length", c.f.len() as f64, seed));
            let mut certs = String::new();
            writeln!(out.transcript, "f = g^{} a = {} (a = {})", c.n, c.f, c.a).unwrap();
            for (i, (h, cert)) in targets.iter().zip(&c.certificates).enumerate() {
                let checked = cert.check(h).map_err(|e| module_error("transverse", e))?;
                let r = p.overlap_range;
                let overlap = transverse::overlap_bound(h, &c.f, p.overlap_e, p.overlap_radius, -r..=r);
                out.rows.push(ResultRow::new("transverse", format!("{params};target={i}"), "certificate_checks", checked as u8 as f64, seed));
                out.rows.push(ResultRow::new(
                    "transverse",
                    format!("{params};target={i};e={};radius={};range={r}", p.overlap_e, p.overlap_radius),
                    "max_overlap",
                    overlap.max_count() as f64,
                    seed,
                ));
                writeln!(certs, "# target {i}").unwrap();
                certs.push_str(&cert.to_text());
                certs.push('\n');
            }
            out.certificates = Some(certs);
        }
        Kind::Cantor => run_cantor(config, &mut out)?,
        Kind::Selftest => {
            let criteria = config.selftest.clone().unwrap_or_default().criteria;
            let results = run_acceptance(&criteria, seed);
            for r in &results {
                out.rows.extend(r.rows.iter().cloned());
                out.rows.push(ResultRow::new("selftest", format!("criterion={}", r.id), "passed", r.passed as u8 as f64, seed));
                writeln!(out.transcript, "{}", r.line()).unwrap();
            }
            out.acceptance = results;
        }
    }
    Ok(out)
}

fn run_cantor(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), HarnessError> {
    let seed = config.seed;
    let (p, p_letter) = config.cantor_inputs()?;
    let err = |e: cantor::CantorError| module_error("cantor", e);
    match p.mode {
        CantorMode::Claim1 | CantorMode::Claim2 => {
            let u = ConeLabel::parse(p.u.as_deref().unwrap_or_default()).map_err(|e| invalid("cantor.u", e))?;
            let n = u.len();
            let pivot = ConeLabel::pivot(n);
            let cap = n + 64;
            let (g, checks) = if p.mode == CantorMode::Claim1 {
                let f = cantor::claim1_f(&u).map_err(err)?;
                let zz = ConeLabel::parse("zz").unwrap();
                let zz_inv = ConeLabel::parse("ZZ").unwrap();
                let checks = vec![
                    (format!("f(Cone({u})) = Cone(zz)"), cantor::sends_cone(&f, &u, &zz, cap).map_err(err)?),
                    (format!("f(Cone({pivot})) = Cone(ZZ)"), cantor::sends_cone(&f, &pivot, &zz_inv, cap).map_err(err)?),
                ];
                (f, checks)
            } else {
                let g = cantor::claim2_g(&u).map_err(err)?;
                let mut checks = vec![
                    (format!("g(Cone({u})) = Cone({pivot})"), cantor::sends_cone(&g, &u, &pivot, cap).map_err(err)?),
                    (format!("g(Cone({pivot})) = Cone({u})"), cantor::sends_cone(&g, &pivot, &u, cap).map_err(err)?),
                ];
                let mut fixed = true;
                for w in cantor::labels_of_length(n) {
                    if w != u && w != pivot {
                        fixed &= cantor::sends_cone(&g, &w, &w, cap).map_err(err)?;
                    }
                }
                checks.push(("every other depth-n cone fixed".to_string(), fixed));
                (g, checks)
            };
            writeln!(out.transcript, "element: {g}").unwrap();
            writeln!(out.transcript, "letters: {}", g.len()).unwrap();
            let params = format!("u={u}");
            out.rows.push(ResultRow::new("cantor", params.clone(), "letters", g.len() as f64, seed));
            for (what, ok) in checks {
                writeln!(out.transcript, "{}: {what}", if ok { "ok" } else { "FAILED" }).unwrap();
                out.rows.push(ResultRow::new("cantor", format!("{params};check={what}"), "verified", ok as u8 as f64, seed));
            }
        }
        CantorMode::Claim3 => {
            let pairs: Vec<(ConeLabel, ConeLabel)> = p
                .pairs
                .iter()
                .map(|[u, v]| Ok((ConeLabel::parse(u)?, ConeLabel::parse(v)?)))
                .collect::<Result<_, cantor::CantorError>>()
                .map_err(|e| invalid("cantor.pairs", e))?;
            let n = pairs[0].0.len();
            let g = cantor::claim3_witness(&pairs, n).map_err(err)?;
            writeln!(out.transcript, "element: {g}").unwrap();
            writeln!(out.transcript, "letters: {}", g.len()).unwrap();
            let params: Vec<String> = pairs.iter().map(|(u, v)| format!("{u}->{v}")).collect();
            let params = format!("pairs={}", params.join(","));
            out.rows.push(ResultRow::new("cantor", params.clone(), "letters", g.len() as f64, seed));
            for (u, v) in &pairs {
                let ok = cantor::sends_cone(&g, u, v, n + 64).map_err(err)?;
                writeln!(out.transcript, "{}: g(Cone({u})) = Cone({v})", if ok { "ok" } else { "FAILED" }).unwrap();
                out.rows.push(ResultRow::new("cantor", format!("{params};check={u}->{v}"), "verified", ok as u8 as f64, seed));
            }
        }
        CantorMode::Qn => {
            for &n in &p.n_list {
                let q = cantor::estimate_qn(p_letter, n, p.trials, p.depth_cap, seed).map_err(err)?;
                let params = format!("p_letter={};n={n};trials={};depth_cap={}", p.p_letter, p.trials, p.depth_cap);
                out.rows.push(ResultRow::new("cantor", params.clone(), "q_n", q.p_hat, seed).with_ci(q.ci_low, q.ci_high));
                out.rows.push(ResultRow::new("cantor", params, "cap_exceeded", q.cap_exceeded as f64, seed));
            }
        }
        CantorMode::Hitting => {
            let exact = cantor::hit_probability_exact();
            let to_f = |q: Q| *q.numer() as f64 / *q.denom() as f64;
            writeln!(out.transcript, "exact: {} (roots {}, {})", exact.minimal, exact.roots.0, exact.roots.1).unwrap();
            out.rows.push(ResultRow::new("cantor", "exact", "hit_probability", to_f(exact.minimal), seed));
            let h = cantor::hitting_estimate(p.trials, p.horizon, seed);
            out.rows.push(
                ResultRow::new("cantor", format!("trials={};horizon={}", p.trials, p.horizon), "hit_probability", h.p_hat, seed)
                    .with_ci(h.ci_low, h.ci_high),
            );
        }
        CantorMode::Superharmonic => {
            let r = cantor::superharmonic_check(p.radius);
            writeln!(out.transcript, "|A| = {}", cantor::alphabet_size()).unwrap();
            writeln!(out.transcript, "vertices checked: {}", r.vertices).unwrap();
            writeln!(out.transcript, "equality off the origin: {}", r.equality_off_origin).unwrap();
            writeln!(out.transcript, "strict at the origin: {}", r.strict_at_origin).unwrap();
            let params = format!("radius={}", p.radius);
            out.rows.push(ResultRow::new("cantor", params.clone(), "equality_off_origin", r.equality_off_origin as u8 as f64, seed));
            out.rows.push(ResultRow::new("cantor", params, "strict_at_origin", r.strict_at_origin as u8 as f64, seed));
        }
    }
    Ok(())
}

/// The output file: a comment header with the config and wall time, then
/// the data. JSON output wraps the rows with the same information.
pub fn render(config: &ExperimentConfig, out: &RunOutput, format: Format) -> String {
    let toml = config.to_toml();
    match format {
        Format::Csv => {
            let mut text = String::new();
            writeln!(text, "# hypmix {}", config.kind.name()).unwrap();
            writeln!(text, "# wall_time_s: {:.3}", out.wall_time).unwrap();
            for line in toml.lines() {
                writeln!(text, "# config: {line}").unwrap();
            }
            if config.kind == Kind::Mix {
                text.push_str(&emit_mixing(&out.mixing, format));
            } else {
                text.push_str(&emit(&out.rows, format));
            }
            text
        }
        Format::Json => {
            let rows = if config.kind == Kind::Mix {
                serde_json::to_value(out.mixing.iter().map(MixingRow::from).collect::<Vec<_>>())
            } else {
                serde_json::to_value(&out.rows)
            }
            .expect("rows serialize");
            let doc = serde_json::json!({
                "experiment": config.kind.name(),
                "config": toml,
                "wall_time_s": out.wall_time,
                "rows": rows,
            });
            serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
        }
    }
}
