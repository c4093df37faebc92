//! One configured run through the `gensmooth run` code path: validation,
//! tuning, the run itself, its diagnostics and the files it writes.

use gensmooth::cli::{cmd_run, RunConfig};

fn main() -> gensmooth::Result<()> {
    let cfg = RunConfig::from_json(
        r#"{
            "objective": {"id": "quartic_well"},
            "method": "gd_nonconvex",
            "x0": [1.5],
            "T": 2000,
            "stride": 10
        }"#,
    )?;
    let out = std::env::temp_dir().join("gensmooth-run-config");
    let report = cmd_run(&cfg, &out)?;
    println!("eta = {:.4e}, stop = {:?}", report.eta, report.stop);
    print!("{}", report.diagnostics.table());
    for f in [
        "config.json",
        "trajectory.csv",
        "trajectory.json",
        "report.json",
    ] {
        let len = std::fs::metadata(out.join(f))?.len();
        println!("{f:<16} {len:>8} bytes");
    }
    let bad = RunConfig::from_json(
        r#"{"objective": {"id": "quartic_well"}, "method": "gd", "x0": [1.5]}"#,
    );
    println!("unknown method rejected: {}", bad.is_err());
    Ok(())
}
