//! Runs every acceptance criterion and prints one line per criterion.

use std::process::{Command, ExitCode};

use hypmix::harness::{run_acceptance, ACCEPTANCE_SEED};

fn selftest_exit_codes() -> Result<(), String> {
    let bin = env!("CARGO_BIN_EXE_hypmix");
    let run = |args: &[&str]| Command::new(bin).args(args).output().map_err(|e| e.to_string());
    let ok = run(&["selftest", "--criteria", "2"])?;
    if ok.status.code() != Some(0) {
        return Err(format!("selftest --criteria 2 exited with {:?}", ok.status.code()));
    }
    let bad = run(&["selftest", "--criteria", "99"])?;
    if bad.status.code() != Some(1) {
        return Err(format!("selftest --criteria 99 exited with {:?}", bad.status.code()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let ids: Vec<u32> = (1..=14).collect();
    let results = run_acceptance(&ids, ACCEPTANCE_SEED);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let cli = selftest_exit_codes();
    match &cli {
        Ok(()) => println!("PASS selftest exit codes"),
        Err(e) => println!("FAIL selftest exit codes: {e}"),
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() && results.len() == 14 && cli.is_ok() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
