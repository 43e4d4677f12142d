//! Unconditional steady state of the cavity field for the two collective
//! couplings of the bad-cavity configuration.
//!
//! ```bash
//! cargo run --release --example steady_state
//! ```

use atomopto::config::RunConfig;
use atomopto::gaussian::{quadrature_report, steady_state};
use atomopto::run::build_model;

fn main() -> atomopto::Result<()> {
    for name in ["fig2a", "fig2c"] {
        let cfg = RunConfig::load(format!("{}/../../configs/{name}.json", env!("CARGO_MANIFEST_DIR")))?;
        let (params, chi_eff) = cfg.params.resolve()?;
        let model = build_model(&params, chi_eff)?;
        let cm = steady_state(&model)?;
        let q = quadrature_report(&cm);
        println!("{name}: g_N = {:.2e} rad/s", params.g_n);
        println!("  alpha_s = {:.2}  chi_eff = {:.4e} rad/s  n_bar = {:.3e}", model.alpha_s, model.chi_eff, model.n_bar);
        println!("  max Re(eig K) = {:.4e} rad/s", model.stability.max_real);
        println!("  <dX^2> = {:.4} ({:+.2} dB)  <dY^2> = {:.4} ({:+.2} dB)", q.var_x, q.squeezing_db_x, q.var_y, q.squeezing_db_y);
        println!("  physicality: min eig(sigma + i Omega/2) = {:.3e}", cm.uncertainty_min_eigenvalue());
    }
    Ok(())
}
