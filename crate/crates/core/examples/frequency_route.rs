//! Cross-checks the Lyapunov covariance against the frequency-domain
//! integral of the noise spectrum, then swaps white thermal noise for the
//! Brownian spectral density.
//!
//! ```bash
//! cargo run --release --example frequency_route
//! ```

use atomopto::config::RunConfig;
use atomopto::gaussian::{steady_state, steady_state_frequency, NoiseModel};
use atomopto::run::build_model;

fn main() -> atomopto::Result<()> {
    let cfg = RunConfig::load(format!("{}/../../configs/fig2c.json", env!("CARGO_MANIFEST_DIR")))?;
    let (params, chi_eff) = cfg.params.resolve()?;
    let model = build_model(&params, chi_eff)?;

    let lyap = steady_state(&model)?;
    let freq = steady_state_frequency(&model, NoiseModel::White)?;
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let scale = (lyap.sigma[(i, i)] * lyap.sigma[(j, j)]).sqrt();
            worst = worst.max((lyap.sigma[(i, j)] - freq.sigma[(i, j)]).abs() / scale);
        }
    }
    println!("Lyapunov  <dX^2> = {:.8}  <dY^2> = {:.8}", lyap.sigma[(2, 2)], lyap.sigma[(3, 3)]);
    println!("frequency <dX^2> = {:.8}  <dY^2> = {:.8}", freq.sigma[(2, 2)], freq.sigma[(3, 3)]);
    println!("largest correlation-normalized difference: {worst:.3e}");

    let brown = steady_state_frequency(&model, NoiseModel::Brownian)?;
    println!("Brownian  <dX^2> = {:.6}  <dY^2> = {:.6}", brown.sigma[(2, 2)], brown.sigma[(3, 3)]);
    Ok(())
}
