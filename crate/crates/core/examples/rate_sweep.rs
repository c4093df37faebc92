//! A grid sweep over horizons and seeds, the same code path as
//! `gensmooth sweep`, with CSV and JSON written to a temporary directory.

use gensmooth::cli::{cmd_sweep, write_sweep, RunConfig};

fn main() -> gensmooth::Result<()> {
    let cfg = RunConfig::from_json(
        r#"{
            "objective": {"id": "power", "params": {"p": 4}},
            "method": "gd_convex",
            "x0": [1.0],
            "grid": {"T": [100, 300, 1000, 3000, 10000], "method": ["gd_convex", "nag_convex"]}
        }"#,
    )?;
    let summary = cmd_sweep(&cfg, None)?;
    for r in &summary.rows {
        println!(
            "{:<12} T = {:>6}  eta = {:.3e}  final gap = {:.4e}",
            format!("{:?}", r.method),
            r.t,
            r.eta.unwrap_or(f64::NAN),
            r.final_gap.unwrap_or(f64::NAN)
        );
    }
    for r in &summary.rate_across_t {
        println!("{:?}: slope of log gap vs log T = {:.3}", r.method, r.slope);
    }
    let dir = std::env::temp_dir().join("gensmooth-rate-sweep");
    write_sweep(&summary, &dir)?;
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}
