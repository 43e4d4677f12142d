//! Heralding on a two-mode squeezed vacuum: counting `s` photons in one arm
//! leaves the other in the Fock state |s>, whose Wigner function is negative
//! at the origin. Shows the conditioning machinery on a state with known
//! answers.
//!
//! ```bash
//! cargo run --release --example heralded_fock
//! ```

use atomopto::conditional::{default_half_width, negativity, wigner_grid, ConditionalField, GsKernel};
use nalgebra::{Matrix2, Matrix4};

fn main() -> atomopto::Result<()> {
    let r: f64 = 0.6;
    let (a, c) = (0.5 * (2.0 * r).cosh(), 0.5 * (2.0 * r).sinh());
    let block = Matrix4::new(
        a, 0.0, c, 0.0, //
        0.0, a, 0.0, -c, //
        c, 0.0, a, 0.0, //
        0.0, -c, 0.0, a,
    );
    let sigma_in = Matrix2::new(a, 0.0, 0.0, a);
    for s in 0..4 {
        let field = ConditionalField::new(GsKernel::new(&block, s)?, sigma_in)?;
        let expected = r.tanh().powi(2 * s as i32) / r.cosh().powi(2);
        let cov = field.covariance();
        let grid = wigner_grid(&field, default_half_width(&field), 257)?;
        let neg = negativity(&grid);
        let w0 = grid.values[128][128];
        println!(
            "s = {s}: p_s = {:.6} (exact {expected:.6}), <dX^2> = {:.6} (exact {:.1}), W(0) = {:+.5} (exact {:+.5}), n_w = {:.4}",
            field.probability(),
            cov[(0, 0)],
            s as f64 + 0.5,
            w0,
            if s % 2 == 0 { 1.0 } else { -1.0 } / std::f64::consts::PI,
            neg.n_w
        );
    }
    Ok(())
}
