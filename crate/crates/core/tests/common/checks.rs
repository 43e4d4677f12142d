//! Property checks shared by the property tests and the acceptance report.
//! Each returns a one-line summary on success and the first violation on
//! failure.

use atomopto::conditional::{conditional_moments, wigner_grid, GsKernel};
use atomopto::gaussian::{steady_state, steady_state_frequency, CovarianceMatrix, NoiseModel};
use atomopto::model::{LinearModel, Mat6, Rates};
use atomopto::quadrature::{integrate_real_line, QuadOptions};
use atomopto::run::{build_model, unconditional_field};
use atomopto::spectra::{intracavity_spectrum, optimal_spectrum, output_point};
use nalgebra::Vector2;
use rand::Rng;

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Largest entrywise difference normalized by `√(σ_ii σ_jj)`.
pub fn correlation_difference(a: &Mat6, b: &Mat6) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let scale = (a[(i, i)] * a[(j, j)]).sqrt();
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

pub fn physical(cm: &CovarianceMatrix, what: &str) -> Check {
    let lmin = cm.uncertainty_min_eigenvalue();
    ensure!(lmin >= -1e-9 * cm.norm().max(1.0), "{what}: min eig(σ + iΩ/2) = {lmin:.3e}");
    ensure!(cm.symmetry_defect() <= 1e-12 * cm.norm(), "{what}: asymmetric CM");
    Ok(format!("min eig {lmin:.3e}"))
}

pub fn uncoupled(n_bar: f64, delta_c: f64, delta_a: f64) -> LinearModel {
    LinearModel::from_rates(&Rates {
        omega_m: 1.0,
        gamma_m: 0.05,
        kappa: 0.4,
        gamma_a: 0.3,
        delta_c_tilde: delta_c,
        delta_a,
        g_n: 0.0,
        chi_eff: 0.0,
        n_bar,
    })
    .unwrap()
}

/// Steady states of the shipped physical parameter sets.
pub fn physical_cms() -> Vec<(String, CovarianceMatrix)> {
    let mut out = Vec::new();
    for g in [2e8, 4e8, 1e9] {
        let m = build_model(&super::bad_cavity(g), None).unwrap();
        out.push((format!("bad cavity g_N = {g:.0e}"), steady_state(&m).unwrap()));
    }
    for t in [0.01, 100.0] {
        let (p, chi) = super::resolved(t);
        let m = build_model(&p, Some(chi)).unwrap();
        out.push((format!("resolved T = {t}"), steady_state(&m).unwrap()));
    }
    out
}

/// (a) Lyapunov and frequency-integral covariances agree to 1e-6.
pub fn lyapunov_vs_frequency(n_models: usize) -> Check {
    let mut rng = super::seeded(20);
    let mut worst: f64 = 0.0;
    for n in 0..n_models {
        let model = super::random_stable_model(&mut rng, 1e-3);
        let lyap = steady_state(&model).map_err(|e| e.to_string())?;
        let freq = steady_state_frequency(&model, NoiseModel::White).map_err(|e| e.to_string())?;
        let d = correlation_difference(&lyap.sigma, &freq.sigma);
        ensure!(d < 1e-6, "model {n}: difference {d:.3e}, rates {:?}", model.rates());
        worst = worst.max(d);
    }
    Ok(format!("{n_models} models, worst correlation-normalized difference {worst:.2e}"))
}

pub fn monte_carlo_models() -> [Rates; 3] {
    [
        Rates {
            omega_m: 1.0,
            gamma_m: 0.3,
            kappa: 0.8,
            gamma_a: 0.5,
            delta_c_tilde: 0.4,
            delta_a: -1.0,
            g_n: 0.5,
            chi_eff: 0.3,
            n_bar: 2.0,
        },
        Rates {
            omega_m: 1.0,
            gamma_m: 0.2,
            kappa: 1.0,
            gamma_a: 0.4,
            delta_c_tilde: 0.0,
            delta_a: -1.0,
            g_n: 0.8,
            chi_eff: 0.4,
            n_bar: 5.0,
        },
        Rates {
            omega_m: 1.0,
            gamma_m: 0.4,
            kappa: 0.6,
            gamma_a: 0.6,
            delta_c_tilde: 1.0,
            delta_a: -0.5,
            g_n: 0.3,
            chi_eff: 0.2,
            n_bar: 3.0,
        },
    ]
}

/// (b) Monte Carlo ensemble within 3 standard errors on every entry.
pub fn monte_carlo() -> Check {
    let mut worst: f64 = 0.0;
    for (n, rates) in monte_carlo_models().iter().enumerate() {
        let model = LinearModel::from_rates(rates).map_err(|e| e.to_string())?;
        let exact = steady_state(&model).map_err(|e| e.to_string())?;
        let mc = super::monte_carlo_covariance(&model, 20_000, 12.0, 0.005, 100 + n as u64);
        for i in 0..6 {
            for j in 0..6 {
                let (a, b, se) = (exact.sigma[(i, j)], mc.sigma[(i, j)], mc.std_err[(i, j)]);
                ensure!(
                    (a - b).abs() <= 3.0 * se,
                    "model {n} entry ({i},{j}): exact {a:.5} vs MC {b:.5} ± {se:.5} ({} steps)",
                    mc.steps
                );
                worst = worst.max((a - b).abs() / se);
            }
        }
    }
    Ok(format!("3 models x 2e4 trajectories, worst deviation {worst:.2} standard errors"))
}

/// (c) Every computed covariance obeys the uncertainty principle.
pub fn uncertainty(n_random: usize) -> Check {
    let mut rng = super::seeded(31);
    let mut worst = f64::INFINITY;
    for n in 0..n_random {
        let model = super::random_stable_model(&mut rng, 1e-6);
        let cm = steady_state(&model).map_err(|e| e.to_string())?;
        physical(&cm, &format!("random model {n}"))?;
        worst = worst.min(cm.uncertainty_min_eigenvalue());
    }
    for (name, cm) in physical_cms() {
        physical(&cm, &name)?;
        worst = worst.min(cm.uncertainty_min_eigenvalue());
    }
    Ok(format!("{n_random} random + 5 physical CMs, smallest eig(σ + iΩ/2) {worst:.3e}"))
}

/// (d) Wigner-grid moments of the unconditioned state reproduce `σ_c`.
pub fn grid_calibration() -> Check {
    let mut cms = physical_cms();
    let mut rng = super::seeded(11);
    for n in 0..3 {
        let cm = steady_state(&super::random_stable_model(&mut rng, 1e-3)).unwrap();
        cms.push((format!("random {n}"), cm));
    }
    let mut worst: f64 = 0.0;
    for (name, cm) in &cms {
        let field = unconditional_field(cm).map_err(|e| e.to_string())?;
        let c = cm.cavity_block();
        let scale = c[(0, 0)].max(c[(1, 1)]);
        let grid = wigner_grid(&field, 8.0 * scale.sqrt(), 257).map_err(|e| e.to_string())?;
        let m = conditional_moments(&grid).map_err(|e| e.to_string())?;
        let got = [m.var_x, m.var_y, m.cov_xy];
        let want = [c[(0, 0)], c[(1, 1)], c[(0, 1)]];
        for k in 0..3 {
            let d = (got[k] - want[k]).abs() / scale;
            ensure!(d <= 1e-3, "{name} moment {k}: {} vs {}", got[k], want[k]);
            worst = worst.max(d);
        }
        ensure!(m.mean_x.abs() < 1e-6 * scale.sqrt() && m.mean_y.abs() < 1e-6 * scale.sqrt(), "{name}: nonzero mean");
    }
    Ok(format!("{} states, worst relative moment error {worst:.2e}", cms.len()))
}

/// (e) Closed-form `G_s` against brute-force 2D quadrature for s = 0, 1, 2.
pub fn g_s_closed_form() -> Check {
    let (p, chi) = super::resolved(0.01);
    let mut cms = vec![
        steady_state(&build_model(&p, Some(chi)).unwrap()).unwrap(),
        steady_state(&build_model(&super::bad_cavity(4e8), None).unwrap()).unwrap(),
    ];
    let mut rng = super::seeded(5);
    cms.push(steady_state(&super::random_stable_model(&mut rng, 1e-3)).unwrap());
    let mut worst: f64 = 0.0;
    for (n, cm) in cms.iter().enumerate() {
        let block = cm.cavity_atom_block();
        let c = cm.cavity_block();
        let width = 1.0 / c[(0, 0)].min(c[(1, 1)]).sqrt();
        for s in 0..3 {
            let kernel = GsKernel::new(&block, s).map_err(|e| e.to_string())?;
            let g0 = kernel.at_origin();
            for &(bx, by) in &[(0.0, 0.0), (0.3, 0.0), (0.0, 0.5), (-0.4, 0.7), (1.0, -0.6)] {
                let beta = (bx * width, by * width);
                let closed = kernel.eval(&Vector2::new(beta.0, beta.1));
                let quad = super::g_s_quadrature(&block, s, beta, 1e-10);
                let d = (closed - quad).abs() / g0;
                ensure!(
                    d <= 1e-6,
                    "cm {n}, s = {s}, β = {beta:?}: closed {closed:.10e} vs quadrature {quad:.10e}"
                );
                worst = worst.max(d);
            }
        }
    }
    Ok(format!("3 states x s = 0..2 x 5 points, worst error {worst:.2e} of G_s(0)"))
}

/// Dense scan of `[0, π)` followed by golden-section refinement.
pub fn min_over_angle(f: impl Fn(f64) -> f64) -> f64 {
    let n = 720;
    let h = std::f64::consts::PI / n as f64;
    let k = (0..n).min_by(|&a, &b| f(a as f64 * h).total_cmp(&f(b as f64 * h))).unwrap();
    let (mut a, mut b) = ((k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

pub fn rotated(s_x: f64, s_y: f64, s_xy: f64) -> impl Fn(f64) -> f64 {
    move |th: f64| th.cos().powi(2) * s_x + th.sin().powi(2) * s_y + 2.0 * th.sin() * th.cos() * s_xy
}

/// (f) The closed-form optimal spectrum equals the minimum over angles.
pub fn optimal_angle() -> Check {
    let mut rng = super::seeded(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..5 {
        let model = super::random_stable_model(&mut rng, 1e-3);
        for &w in &[-2.0, -1.0, -0.3, 0.0, 0.7, 1.5] {
            let (s_x, s_y, s_xy) = output_point(&model, NoiseModel::White, w).map_err(|e| e.to_string())?;
            let closed = optimal_spectrum(s_x, s_y, s_xy);
            let numeric = min_over_angle(rotated(s_x, s_y, s_xy));
            let d = (closed - numeric).abs() / s_x.max(s_y);
            ensure!(d <= 1e-9, "ω = {w}: {closed} vs {numeric}");
            worst = worst.max(d);
            count += 1;
        }
    }
    for _ in 0..200 {
        let (s_x, s_y) = (rng.random_range(0.01..10.0), rng.random_range(0.01..10.0));
        let s_xy = rng.random_range(-0.999..0.999) * f64::sqrt(s_x * s_y);
        let closed = optimal_spectrum(s_x, s_y, s_xy);
        let numeric = min_over_angle(rotated(s_x, s_y, s_xy));
        let d = (closed - numeric).abs() / s_x.max(s_y);
        ensure!(d <= 1e-9, "({s_x}, {s_y}, {s_xy}): {closed} vs {numeric}");
        worst = worst.max(d);
        count += 1;
    }
    Ok(format!("{count} spectral matrices, worst relative gap {worst:.2e}"))
}

/// (g) An uncoupled cavity emits flat shot noise.
pub fn passive_shot_noise() -> Check {
    let mut worst: f64 = 0.0;
    for &(dc, da) in &[(0.0, -1.0), (0.7, 0.3), (-1.5, 2.0)] {
        let model = uncoupled(10.0, dc, da);
        for &w in &[-3.0, -1.0, -0.2, 0.0, 0.5, 2.0, 10.0] {
            let (s_x, s_y, s_xy) = output_point(&model, NoiseModel::White, w).map_err(|e| e.to_string())?;
            let opt = optimal_spectrum(s_x, s_y, s_xy);
            let d = [(s_x - 0.5).abs(), (s_y - 0.5).abs(), s_xy.abs(), (opt - 0.5).abs()]
                .into_iter()
                .fold(0.0, f64::max);
            ensure!(d < 1e-12, "Δ̃_c = {dc}, Δ_a = {da}, ω = {w}: ({s_x}, {s_y}, {s_xy})");
            worst = worst.max(d);
        }
    }
    Ok(format!("21 frequencies, worst deviation from 1/2 {worst:.1e}"))
}

/// (h) Without couplings light and atoms sit at the SQL and the mirror is
/// thermal.
pub fn zero_coupling_baselines() -> Check {
    let mut worst: f64 = 0.0;
    for &n_bar in &[0.0, 3.0, 250.0] {
        let cm = steady_state(&uncoupled(n_bar, 0.3, -0.8)).map_err(|e| e.to_string())?;
        for i in 2..6 {
            for j in 2..6 {
                let expected = if i == j { 0.5 } else { 0.0 };
                let d = (cm.sigma[(i, j)] - expected).abs();
                ensure!(d < 1e-12, "n̄ = {n_bar}: σ[{i}][{j}] = {}", cm.sigma[(i, j)]);
                worst = worst.max(d);
            }
            ensure!(cm.sigma[(0, i)].abs() < 1e-12 && cm.sigma[(1, i)].abs() < 1e-12, "mirror correlated with mode {i}");
        }
        for i in 0..2 {
            ensure!(
                (cm.sigma[(i, i)] - (n_bar + 0.5)).abs() < 1e-10 * (n_bar + 0.5),
                "n̄ = {n_bar}: mirror variance {}",
                cm.sigma[(i, i)]
            );
        }
    }
    Ok(format!("light and atom blocks within {worst:.1e} of 1/2"))
}

/// The intracavity spectrum integrates to the cavity covariance.
pub fn parseval() -> Check {
    let mut rng = super::seeded(3);
    let mut worst: f64 = 0.0;
    for n in 0..4 {
        let model = super::random_stable_model(&mut rng, 1e-3);
        let cm = steady_state(&model).map_err(|e| e.to_string())?;
        let breaks: Vec<f64> = model.stability.eigenvalues.iter().map(|&(_, im)| im).collect();
        let opts = QuadOptions {
            rel_tol: 1e-9,
            ..Default::default()
        };
        let res = integrate_real_line(
            |w, out| {
                let s = intracavity_spectrum(&model, NoiseModel::White, w).unwrap();
                out[0] = s[(0, 0)];
                out[1] = s[(1, 1)];
                out[2] = s[(0, 1)];
            },
            3,
            1.0,
            &breaks,
            &opts,
        );
        let two_pi = 2.0 * std::f64::consts::PI;
        let c = cm.cavity_block();
        let scale = c[(0, 0)].max(c[(1, 1)]);
        for (k, want) in [c[(0, 0)], c[(1, 1)], c[(0, 1)]].into_iter().enumerate() {
            let got = res.value[k] / two_pi;
            let d = (got - want).abs() / scale;
            ensure!(d <= 1e-4, "model {n} component {k}: {got} vs {want}");
            worst = worst.max(d);
        }
    }
    Ok(format!("4 models, worst relative error {worst:.2e}"))
}
