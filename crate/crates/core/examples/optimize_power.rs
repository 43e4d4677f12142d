//! Finds the pump power that minimizes the phase-quadrature variance under a
//! stability margin, then scans the collective coupling with per-point power
//! optimization.
//!
//! ```bash
//! cargo run --release --example optimize_power
//! ```

use atomopto::config::RunConfig;
use atomopto::gaussian::to_db;
use atomopto::run::{run_optimize_power, run_sweep};

fn main() -> atomopto::Result<()> {
    let cfg = RunConfig::load(format!("{}/../../configs/loss_reduction.json", env!("CARGO_MANIFEST_DIR")))?;
    let best = run_optimize_power(&cfg)?;
    println!(
        "optimal power {:.4e} W: chi_eff = {:.4e} rad/s, <dY^2> = {:.4} ({:+.2} dB), {} evaluations",
        best.power,
        best.chi_eff,
        best.var_y,
        to_db(best.var_y),
        best.evaluations
    );

    let cfg = RunConfig::load(format!("{}/../../configs/fig4.json", env!("CARGO_MANIFEST_DIR")))?;
    let r = run_sweep(&cfg)?;
    println!("{:>12} {:>12} {:>12} {:>10}", "g_N", "power", "chi_eff", "<dY^2>");
    for rec in &r.records {
        match (rec.chi_eff, rec.var_y) {
            (Some(c), Some(v)) => println!("{:>12.4e} {:>12.4e} {:>12.4e} {:>10.4}", rec.coords[0], rec.power, c, v),
            _ => println!("{:>12.4e} {}", rec.coords[0], rec.error.as_deref().unwrap_or("no feasible power")),
        }
    }
    Ok(())
}
