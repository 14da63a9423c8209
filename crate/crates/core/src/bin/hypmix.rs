use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypmix::harness::{
    self, CantorMode, CantorParams, DriftParams, ExperimentConfig, FreeprodParams, HarnessError, Kind, MixParams,
    SelftestParams, TransverseParams, WalkParams,
};

#[derive(Parser)]
#[command(name = "hypmix", version, about = "Random walks, subgroup mixing and the F2*S18 boundary action")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one trajectory.
    Walk {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Estimate the drift |w_n|/n.
    Drift {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Witness-based lower bounds for mu^n(N(U,V)).
    Mix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rank: Option<usize>,
        /// Generators of H, comma separated.
        #[arg(long = "H")]
        h: Option<String>,
        /// Generators of K, comma separated.
        #[arg(long = "K")]
        k: Option<String>,
        #[arg(long)]
        window_radius: Option<usize>,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Free-product absorption <H, w_n> = H * <w_n>.
    Freeprod {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long = "H")]
        h: Option<String>,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Also test whether k independent walks generate a free group of rank k.
        #[arg(long)]
        random_k: Option<usize>,
    },
    /// Build an element transverse to every listed subgroup.
    Transverse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rank: Option<usize>,
        /// One subgroup per line, generators separated by commas or spaces.
        #[arg(long)]
        subgroups: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        emit_certificate: Option<PathBuf>,
    },
    /// Claims about the F2*S18 action on the boundary of the F3 tree.
    Cantor {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        claim: Option<u8>,
        #[arg(long)]
        u: Option<String>,
        /// u:v pairs, comma separated, e.g. zx:Xz,zy:zz
        #[arg(long)]
        pairs: Option<String>,
        /// Estimate q_n.
        #[arg(long)]
        qn: bool,
        /// Exact and simulated hitting probability.
        #[arg(long)]
        hitting: bool,
        /// Exact superharmonic check.
        #[arg(long)]
        superharmonic: bool,
        #[arg(long)]
        p_letter: Option<String>,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        depth_cap: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Run the acceptance criteria.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long)]
        criteria: Option<String>,
    },
}

fn invalid(field: &str, message: impl ToString) -> HarnessError {
    HarnessError::Validation { field: field.to_string(), message: message.to_string() }
}

fn required<T>(value: Option<T>, field: &str) -> Result<T, HarnessError> {
    value.ok_or_else(|| invalid(field, "required (flag or config)"))
}

fn list<T: std::str::FromStr>(text: &str, field: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| invalid(field, format!("{s:?}: {e}"))))
        .collect()
}

fn base_config(common: &Common, kind: Kind) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(kind),
    };
    if config.kind != kind {
        return Err(invalid("kind", format!("config is for {}, not {}", config.kind.name(), kind.name())));
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(threads) = common.threads {
        config.threads = Some(threads);
    }
    if let Some(format) = &common.format {
        config.format = format.parse()?;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.display().to_string());
    }
    Ok(config)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Builds the config and reports where a certificate file should go.
fn build(command: Command) -> Result<(ExperimentConfig, Option<PathBuf>), HarnessError> {
    let mut certificate = None;
    let config = match command {
        Command::Walk { common, rank, measure, n } => {
            let mut c = base_config(&common, Kind::Walk)?;
            let p = match c.walk.take() {
                Some(mut p) => {
                    set(&mut p.rank, rank);
                    set(&mut p.measure, measure);
                    set(&mut p.n, n);
                    p
                }
                None => WalkParams { rank: rank.unwrap_or(2), measure: measure.unwrap_or_else(|| "uniform".into()), n: required(n, "walk.n")? },
            };
            c.walk = Some(p);
            c
        }
        Command::Drift { common, rank, measure, n, trials } => {
            let mut c = base_config(&common, Kind::Drift)?;
            let p = match c.drift.take() {
                Some(mut p) => {
                    set(&mut p.rank, rank);
                    set(&mut p.measure, measure);
                    set(&mut p.n, n);
                    set(&mut p.trials, trials);
                    p
                }
                None => DriftParams {
                    rank: rank.unwrap_or(2),
                    measure: measure.unwrap_or_else(|| "uniform".into()),
                    n: required(n, "drift.n")?,
                    trials: trials.unwrap_or(500),
                },
            };
            c.drift = Some(p);
            c
        }
        Command::Mix { common, rank, h, k, window_radius, measure, n_list, trials } => {
            let mut c = base_config(&common, Kind::Mix)?;
            let h = h.map(|s| list::<String>(&s, "mix.h")).transpose()?;
            let k = k.map(|s| list::<String>(&s, "mix.k")).transpose()?;
            let n_list = n_list.map(|s| list::<usize>(&s, "mix.n_list")).transpose()?;
            let p = match c.mix.take() {
                Some(mut p) => {
                    set(&mut p.rank, rank);
                    set(&mut p.h, h);
                    set(&mut p.k, k);
                    set(&mut p.window_radius, window_radius);
                    set(&mut p.measure, measure);
                    set(&mut p.n_list, n_list);
                    set(&mut p.trials, trials);
                    p
                }
                None => MixParams {
                    rank: rank.unwrap_or(2),
                    h: required(h, "mix.h")?,
                    k: required(k, "mix.k")?,
                    window_radius: required(window_radius, "mix.window_radius")?,
                    measure: measure.unwrap_or_else(|| "uniform".into()),
                    n_list: required(n_list, "mix.n_list")?,
                    trials: trials.unwrap_or(500),
                    extra_pairs: vec![],
                },
            };
            c.mix = Some(p);
            c
        }
        Command::Freeprod { common, rank, h, measure, n_list, trials, random_k } => {
            let mut c = base_config(&common, Kind::Freeprod)?;
            let h = h.map(|s| list::<String>(&s, "freeprod.h")).transpose()?;
            let n_list = n_list.map(|s| list::<usize>(&s, "freeprod.n_list")).transpose()?;
            let p = match c.freeprod.take() {
                Some(mut p) => {
                    set(&mut p.rank, rank);
                    set(&mut p.h, h);
                    set(&mut p.measure, measure);
                    set(&mut p.n_list, n_list);
                    set(&mut p.trials, trials);
                    if random_k.is_some() {
                        p.random_k = random_k;
                    }
                    p
                }
                None => FreeprodParams {
                    rank: rank.unwrap_or(2),
                    h: required(h, "freeprod.h")?,
                    measure: measure.unwrap_or_else(|| "uniform".into()),
                    n_list: required(n_list, "freeprod.n_list")?,
                    trials: trials.unwrap_or(500),
                    random_k,
                },
            };
            c.freeprod = Some(p);
            c
        }
        Command::Transverse { common, rank, subgroups, g, emit_certificate } => {
            let mut c = base_config(&common, Kind::Transverse)?;
            let p = match c.transverse.take() {
                Some(mut p) => {
                    set(&mut p.rank, rank);
                    if subgroups.is_some() {
                        p.subgroups_file = subgroups;
                    }
                    set(&mut p.g, g);
                    p
                }
                None => TransverseParams {
                    rank: rank.unwrap_or(2),
                    subgroups: vec![],
                    subgroups_file: Some(required(subgroups, "transverse.subgroups")?),
                    g: required(g, "transverse.g")?,
                    overlap_e: 3,
                    overlap_radius: 4,
                    overlap_range: 8,
                },
            };
            c.transverse = Some(p);
            certificate = emit_certificate;
            c
        }
        Command::Cantor {
            common,
            claim,
            u,
            pairs,
            qn,
            hitting,
            superharmonic,
            p_letter,
            n_list,
            trials,
            depth_cap,
            horizon,
            radius,
        } => {
            let mut c = base_config(&common, Kind::Cantor)?;
            let modes: Vec<CantorMode> = [
                (claim == Some(1), CantorMode::Claim1),
                (claim == Some(2), CantorMode::Claim2),
                (claim == Some(3), CantorMode::Claim3),
                (qn, CantorMode::Qn),
                (hitting, CantorMode::Hitting),
                (superharmonic, CantorMode::Superharmonic),
            ]
            .into_iter()
            .filter(|(on, _)| *on)
            .map(|(_, m)| m)
            .collect();
            if modes.len() > 1 {
                return Err(invalid("cantor.mode", "choose one of --claim, --qn, --hitting, --superharmonic"));
            }
            let mut p = match (c.cantor.take(), modes.first()) {
                (Some(mut p), mode) => {
                    if let Some(&m) = mode {
                        p.mode = m;
                    }
                    p
                }
                (None, Some(&mode)) => {
                    let mut p: CantorParams = toml::from_str(&format!("mode = {:?}", mode_name(mode))).expect("defaults");
                    p.mode = mode;
                    p
                }
                (None, None) => return Err(invalid("cantor.mode", "choose one of --claim, --qn, --hitting, --superharmonic")),
            };
            if u.is_some() {
                p.u = u;
            }
            if let Some(pairs) = pairs {
                p.pairs = list::<String>(&pairs, "cantor.pairs")?
                    .into_iter()
                    .map(|pair| match pair.split_once(':') {
                        Some((a, b)) => Ok([a.to_string(), b.to_string()]),
                        None => Err(invalid("cantor.pairs", format!("expected u:v, got {pair:?}"))),
                    })
                    .collect::<Result<_, _>>()?;
            }
            set(&mut p.p_letter, p_letter);
            set(&mut p.n_list, n_list.map(|s| list::<usize>(&s, "cantor.n_list")).transpose()?);
            set(&mut p.trials, trials);
            set(&mut p.depth_cap, depth_cap);
            set(&mut p.horizon, horizon);
            set(&mut p.radius, radius);
            c.cantor = Some(p);
            c
        }
        Command::Selftest { common, criteria } => {
            let mut c = base_config(&common, Kind::Selftest)?;
            if let Some(list_text) = criteria {
                c.selftest = Some(SelftestParams { criteria: list::<u32>(&list_text, "selftest.criteria")? });
            } else if c.selftest.is_none() {
                c.selftest = Some(SelftestParams::default());
            }
            if common.seed.is_none() && common.config.is_none() {
                c.seed = harness::ACCEPTANCE_SEED;
            }
            c
        }
    };
    Ok((config, certificate))
}

fn mode_name(mode: CantorMode) -> &'static str {
    match mode {
        CantorMode::Claim1 => "claim1",
        CantorMode::Claim2 => "claim2",
        CantorMode::Claim3 => "claim3",
        CantorMode::Qn => "qn",
        CantorMode::Hitting => "hitting",
        CantorMode::Superharmonic => "superharmonic",
    }
}

fn write(path: &std::path::Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build(cli.command).and_then(|(config, certificate)| {
        let out = harness::run_full(&config)?;
        let text = harness::render(&config, &out, config.format);
        let to_file = config.output.is_some();
        match &config.output {
            Some(path) => write(std::path::Path::new(path), &text)?,
            None => print!("{text}"),
        }
        if !out.transcript.is_empty() {
            if to_file {
                print!("{}", out.transcript);
            } else {
                eprint!("{}", out.transcript);
            }
        }
        if let (Some(path), Some(certs)) = (certificate, &out.certificates) {
            write(&path, certs)?;
        }
        Ok((config.kind, out))
    });
    match result {
        Ok((Kind::Selftest, out)) if !out.acceptance_passed() => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
