//! Shared oracles for the integration tests: random stable models, a Monte
//! Carlo integrator of the Langevin equations, and a brute-force quadrature
//! of the conditional characteristic function.

#![allow(dead_code)]

pub mod checks;

use atomopto::conditional::laguerre_coefficients;
use atomopto::model::{LinearModel, Mat6, PhysicalParams, Rates};
use atomopto::quadrature::{integrate, QuadOptions};
use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// The bad-cavity, high-temperature parameter set used for the Wigner
/// snapshots.
pub fn bad_cavity(g_n: f64) -> PhysicalParams {
    let two_pi = 2.0 * std::f64::consts::PI;
    let omega_m = two_pi * 1e7;
    PhysicalParams {
        omega_m,
        gamma_m: omega_m / 1e4,
        mass: 2e-16,
        omega_l: PhysicalParams::omega_from_wavelength(1540e-9),
        power: 2.36e-3,
        cavity_length: 1e-3,
        kappa: two_pi * 2e6,
        gamma_a: two_pi * 2e5,
        g_n,
        delta_c_tilde: 0.0,
        delta_a: -omega_m,
        temperature: 100.0,
    }
}

/// The resolved-sideband set with the largest amplitude-quadrature squeezing.
pub fn resolved(temperature: f64) -> (PhysicalParams, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let omega_m = two_pi * 4.92e5;
    let p = PhysicalParams {
        omega_m,
        gamma_m: two_pi * 0.1,
        mass: 2e-16,
        omega_l: PhysicalParams::omega_from_wavelength(1540e-9),
        power: 0.09,
        cavity_length: 20e-3,
        kappa: two_pi * 8e3,
        gamma_a: two_pi * 8e2,
        g_n: 1.11e7,
        delta_c_tilde: omega_m,
        delta_a: -omega_m,
        temperature,
    };
    (p, 7.15e6)
}

/// Dimensionless model with `ω_m = 1` and every other rate of order one,
/// redrawn until the drift is stable with margin `min_decay`. The thermal
/// occupation stays at `n̄ ≥ 2`, where the Brownian-motion bath is a valid
/// quantum noise model.
pub fn random_stable_model(rng: &mut ChaCha8Rng, min_decay: f64) -> LinearModel {
    loop {
        let rates = Rates {
            omega_m: 1.0,
            gamma_m: 10f64.powf(rng.random_range(-3.0..-0.5)),
            kappa: rng.random_range(0.1..2.0),
            gamma_a: rng.random_range(0.05..1.0),
            delta_c_tilde: rng.random_range(-2.0..2.0),
            delta_a: rng.random_range(-2.0..2.0),
            g_n: rng.random_range(0.0..1.5),
            chi_eff: rng.random_range(0.0..0.8),
            n_bar: rng.random_range(2.0..20.0),
        };
        if let Ok(m) = LinearModel::from_rates(&rates) {
            if m.stability.max_real < -min_decay {
                return m;
            }
        }
    }
}

/// Ensemble estimate of the stationary covariance with its standard errors.
pub struct McEstimate {
    pub sigma: Mat6,
    pub std_err: Mat6,
    pub trajectories: usize,
    pub steps: usize,
}

/// Euler–Maruyama integration of `dv = K v dt + √D dW` from `v = 0`, run
/// for `relaxation_times` slowest decay times with `dt = dt_factor/max|eig K|`.
/// Each trajectory has its own ChaCha stream, so the result does not depend
/// on the thread count.
pub fn monte_carlo_covariance(
    model: &LinearModel,
    trajectories: usize,
    relaxation_times: f64,
    dt_factor: f64,
    seed: u64,
) -> McEstimate {
    let k = model.drift;
    let noise_sd: [f64; 6] = std::array::from_fn(|i| model.diffusion[(i, i)].sqrt());
    let dt = dt_factor / model.stability.max_abs();
    let steps = (relaxation_times / -model.stability.max_real / dt).ceil() as usize;
    let sqrt_dt = dt.sqrt();

    let finals: Vec<[f64; 6]> = (0..trajectories)
        .into_par_iter()
        .map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let mut v = [0.0f64; 6];
            for _ in 0..steps {
                let mut next = v;
                for i in 0..6 {
                    let mut drift = 0.0;
                    for j in 0..6 {
                        drift += k[(i, j)] * v[j];
                    }
                    let z: f64 = StandardNormal.sample(&mut rng);
                    next[i] += drift * dt + noise_sd[i] * sqrt_dt * z;
                }
                v = next;
            }
            v
        })
        .collect();

    let nf = trajectories as f64;
    let mut sigma = Mat6::zeros();
    let mut std_err = Mat6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            let prod: Vec<f64> = finals.iter().map(|v| v[i] * v[j]).collect();
            let mean = prod.iter().sum::<f64>() / nf;
            let var = prod.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            sigma[(i, j)] = mean;
            std_err[(i, j)] = (var / nf).sqrt();
        }
    }
    McEstimate {
        sigma,
        std_err,
        trajectories,
        steps,
    }
}

/// `G_s(β) = ∫d²γ e^{−|γ|²/2} ζ(β, γ) L_s(|γ|²)` by nested adaptive
/// quadrature, with `ζ(β, γ) = exp(−vᵀΣv)` over the cavity–atom block.
pub fn g_s_quadrature(block: &Matrix4<f64>, s: usize, beta: (f64, f64), rel_tol: f64) -> f64 {
    let coeffs = laguerre_coefficients(s);
    let laguerre = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    // The γ-Gaussian is centred at −M⁻¹Cᵀβ, so the box follows it.
    let m = block.fixed_view::<2, 2>(2, 2) + nalgebra::Matrix2::identity() * 0.5;
    let c = block.fixed_view::<2, 2>(0, 2);
    let centre = -(m.try_inverse().unwrap() * c.transpose() * nalgebra::Vector2::new(beta.0, beta.1));
    let lmin = m.symmetric_eigen().eigenvalues.min();
    let r = ((46.0 + 4.0 * s as f64) / lmin).sqrt() + 2.0 * s as f64;
    let opts = QuadOptions {
        rel_tol,
        abs_tol: 0.0,
        max_subdivisions: 20_000,
    };
    let inner = |gx: f64| {
        let f = |gy: f64| {
            let v = Vector4::new(beta.0, beta.1, gx, gy);
            let q = (v.transpose() * block * v)[(0, 0)];
            let g2 = gx * gx + gy * gy;
            (-q - 0.5 * g2).exp() * laguerre(g2)
        };
        let res = integrate(f, centre[1] - r, centre[1] + r, &opts);
        assert!(res.converged, "inner quadrature did not converge");
        res.value[0]
    };
    let res = integrate(inner, centre[0] - r, centre[0] + r, &opts);
    assert!(res.converged, "outer quadrature did not converge");
    res.value[0]
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
