//! Amplitude-quadrature variance against bath temperature, unconditioned
//! and after a single-photon detection, with the temperatures at which each
//! curve crosses the shot-noise level.
//!
//! ```bash
//! cargo run --release --example temperature_sweep
//! ```

use atomopto::config::RunConfig;
use atomopto::run::{first_crossing, run_sweep};

fn main() -> atomopto::Result<()> {
    let cfg = RunConfig::load(format!("{}/../../configs/fig5.json", env!("CARGO_MANIFEST_DIR")))?;
    let r = run_sweep(&cfg)?;
    let t: Vec<f64> = r.records.iter().map(|rec| rec.coords[0]).collect();
    let v: Vec<f64> = r.records.iter().map(|rec| rec.var_x.unwrap_or(f64::NAN)).collect();
    let vc: Vec<f64> = r.records.iter().map(|rec| rec.cond_var_x.unwrap_or(f64::NAN)).collect();
    println!("{:>10} {:>10} {:>10}", "T (K)", "<dX^2>", "<dX^2>_c");
    for k in (0..t.len()).step_by(10) {
        println!("{:>10.4} {:>10.4} {:>10.4}", t[k], v[k], vc[k]);
    }
    let fmt = |x: Option<f64>| x.map_or("none in range".to_string(), |x| format!("{x:.4} K"));
    println!("shot-noise crossing, unconditioned: {}", fmt(first_crossing(&t, &v, 0.5)));
    println!("shot-noise crossing, conditioned:   {}", fmt(first_crossing(&t, &vc, 0.5)));
    Ok(())
}
