//! Cavity-detuning by atomic-detuning map of the amplitude-quadrature
//! variance at low temperature, printed as a coarse text map.
//!
//! ```bash
//! cargo run --release --example stability_map
//! ```

use atomopto::config::RunConfig;
use atomopto::run::run_sweep;

fn main() -> atomopto::Result<()> {
    let cfg = RunConfig::load(format!("{}/../../configs/fig3.json", env!("CARGO_MANIFEST_DIR")))?;
    let r = run_sweep(&cfg)?;
    let (nx, ny) = (r.axes[0].values.len(), r.axes[1].values.len());

    println!("rows: delta_c_tilde/omega_m from -1 to 1; columns: delta_a/omega_m from -2 to 0");
    println!("'#' unstable, digits = floor(10*<dY^2>) capped at 9");
    for i in (0..nx).step_by(2) {
        let line: String = (0..ny)
            .step_by(2)
            .map(|j| {
                let rec = &r.records[i * ny + j];
                match rec.var_y {
                    Some(v) if rec.stable => char::from_digit(((10.0 * v) as u32).min(9), 10).unwrap(),
                    _ => '#',
                }
            })
            .collect();
        println!("{line}");
    }
    let omega_m = cfg.params.resolve()?.0.omega_m;
    let best = r.argmin(|rec| rec.var_y).expect("at least one stable point");
    println!(
        "minimum <dY^2> = {:.4} at delta_c_tilde = {:.3} omega_m, delta_a = {:.3} omega_m",
        best.var_y.unwrap(),
        best.coords[0] / omega_m,
        best.coords[1] / omega_m
    );
    let unstable = r.records.iter().filter(|rec| !rec.stable).count();
    println!("{unstable} of {} points unstable", r.records.len());
    Ok(())
}
