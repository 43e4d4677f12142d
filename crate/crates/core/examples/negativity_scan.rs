//! Negativity volume of the two-photon conditional state across the
//! effective optomechanical coupling.
//!
//! ```bash
//! cargo run --release --example negativity_scan
//! ```

use atomopto::config::RunConfig;
use atomopto::run::run_sweep;

fn main() -> atomopto::Result<()> {
    let cfg = RunConfig::load(format!("{}/../../configs/fig8.json", env!("CARGO_MANIFEST_DIR")))?;
    let r = run_sweep(&cfg)?;
    println!("{:>12} {:>10} {:>10} {:>12} {:>12}", "chi_eff", "<dX^2>_c", "<dY^2>_c", "p_2", "n_w");
    for rec in &r.records {
        let f = |x: Option<f64>| x.map_or(f64::NAN, |x| x);
        println!(
            "{:>12.4e} {:>10.4} {:>10.4} {:>12.4e} {:>12.4e}",
            rec.coords[0],
            f(rec.cond_var_x),
            f(rec.cond_var_y),
            f(rec.probability),
            f(rec.n_w)
        );
    }
    Ok(())
}
