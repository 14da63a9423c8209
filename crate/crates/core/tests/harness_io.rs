use std::path::PathBuf;
use std::process::Command;

use hypmix::harness::{emit, parse, parse_mixing, ExperimentConfig, Format, ResultRow};
use proptest::prelude::*;

fn configs() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    out.sort();
    out
}

fn row() -> impl Strategy<Value = ResultRow> {
    ("[a-z]{1,8}", "[a-z0-9=;]{0,12}", "[a-z_]{1,8}", any::<f64>(), any::<f64>(), any::<f64>(), any::<u64>())
        .prop_filter("finite", |(_, _, _, v, lo, hi, _)| v.is_finite() && lo.is_finite() && hi.is_finite())
        .prop_map(|(e, p, m, v, lo, hi, s)| ResultRow::new(&e, p, &m, v, s).with_ci(lo, hi))
}

proptest! {
    #[test]
    fn rows_round_trip(rows in prop::collection::vec(row(), 0..6)) {
        for format in [Format::Csv, Format::Json] {
            let text = emit(&rows, format);
            prop_assert_eq!(parse(&text, format).unwrap(), rows.clone());
        }
    }
}

#[test]
fn example_configs_load_and_round_trip() {
    let all = configs();
    assert!(all.len() >= 20);
    for path in all {
        let config = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        config.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = ExperimentConfig::from_toml(&config.to_toml()).unwrap();
        assert_eq!(again, config, "{}", path.display());
    }
}

fn hypmix() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypmix"))
}

#[test]
fn cli_writes_and_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("drift.toml");
    std::fs::write(&config, "kind = \"drift\"\nseed = 4\n\n[drift]\nrank = 2\nn = 200\ntrials = 100\n").unwrap();
    let out = dir.path().join("drift.csv");
    let status = hypmix()
        .args(["drift", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let rows = parse(&std::fs::read_to_string(&out).unwrap(), Format::Csv).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.seed == 4 && r.experiment == "drift"));

    let json = dir.path().join("drift.json");
    let status = hypmix().args(["drift", "--config"]).arg(&config).arg("--out").arg(&json).args(["--format", "json"]).status().unwrap();
    assert!(status.success());
    let from_json = parse(&std::fs::read_to_string(&json).unwrap(), Format::Json).unwrap();
    assert_eq!(from_json, rows);
}

#[test]
fn cli_mix_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mix.csv");
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/mix_standard.toml");
    let status = hypmix().args(["mix", "--config"]).arg(&config).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "n,trials,successes,p_hat,ci_low,ci_high,seed"));
    let rows = parse_mixing(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 20, 40, 80, 160]);
}

#[test]
fn cli_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "kind = \"drift\"\n\n[drift]\nrank = 0\nn = 10\ntrials = 10\n").unwrap();
    let out = hypmix().args(["drift", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));

    let out = hypmix().args(["transverse", "--subgroups", "/nonexistent/file", "--g", "ab"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = hypmix().args(["cantor", "--claim", "1", "--u", "xy"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_transverse_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let subs = dir.path().join("subs.txt");
    std::fs::write(&subs, "a\nb\n").unwrap();
    let cert = dir.path().join("cert.txt");
    let out = hypmix()
        .args(["transverse", "--subgroups"])
        .arg(&subs)
        .args(["--g", "ab", "--emit-certificate"])
        .arg(&cert)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&cert).unwrap();
    assert_eq!(text.matches("verdict: transverse").count(), 2, "{text}");
}
