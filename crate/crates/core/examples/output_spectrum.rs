//! Output-field noise spectra and the optimal-quadrature spectrum
//! `S_opt(omega)` of the resolved-sideband configuration. Writes the table as
//! CSV when an output path is given.
//!
//! ```bash
//! cargo run --release --example output_spectrum -- /tmp/spectrum.csv
//! ```

use std::fs::File;
use std::io::BufWriter;

use atomopto::config::RunConfig;
use atomopto::run::run_spectrum;

fn main() -> atomopto::Result<()> {
    let cfg = RunConfig::load(format!("{}/../../configs/fig7.json", env!("CARGO_MANIFEST_DIR")))?;
    let (summary, result) = run_spectrum(&cfg)?;
    let omega_m = cfg.params.resolve()?.0.omega_m;
    println!(
        "min S_opt = {:.3} dB at omega = {:+.4} omega_m (chi_eff = {:.3e} rad/s)",
        summary.min_s_opt_db,
        summary.omega_at_min / omega_m,
        summary.chi_eff
    );
    let stride = result.omega.len() / 16;
    println!("{:>10} {:>12} {:>12} {:>10}", "omega/w_m", "S_X", "S_Y", "S_opt dB");
    for k in (0..result.omega.len()).step_by(stride.max(1)) {
        println!(
            "{:>10.3} {:>12.5} {:>12.5} {:>10.3}",
            result.omega[k] / omega_m,
            result.s_x[k],
            result.s_y[k],
            result.s_opt_db[k]
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        result.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
