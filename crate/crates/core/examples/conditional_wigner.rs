//! Conditional Wigner function of the cavity field after detecting `s`
//! photons in the atomic mode: grid moments against the closed form, outcome
//! probability and negativity volume. Writes the grid as CSV when an output
//! path is given.
//!
//! ```bash
//! cargo run --release --example conditional_wigner -- /tmp/wigner.csv
//! ```

use std::fs::File;
use std::io::BufWriter;

use atomopto::config::RunConfig;
use atomopto::run::run_wigner;

fn main() -> atomopto::Result<()> {
    for name in ["fig2d", "fig6a"] {
        let cfg = RunConfig::load(format!("{}/../../configs/{name}.json", env!("CARGO_MANIFEST_DIR")))?;
        let (summary, grid) = run_wigner(&cfg)?;
        println!("{name}: s = {:?}, p_s = {:.4e}", summary.s, summary.probability);
        println!("  grid: half-width {:.3}, {} points, mass {:.12}", summary.half_width, summary.n_points, summary.moments.mass);
        println!(
            "  <dX^2> grid {:.6} closed form {:.6}; <dY^2> grid {:.6} closed form {:.6}",
            summary.moments.var_x, summary.analytic_var_x, summary.moments.var_y, summary.analytic_var_y
        );
        println!("  n_w = {:.3e}, min W = {:.3e}", summary.negativity.n_w, summary.negativity.min_w);
        if let Some(path) = std::env::args().nth(1) {
            let path = format!("{path}.{name}");
            grid.write_csv(BufWriter::new(File::create(&path)?))?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
