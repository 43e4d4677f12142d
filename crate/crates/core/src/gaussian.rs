//! Steady-state covariance matrix of the linearized fluctuations, by two
//! independent routes: the algebraic Lyapunov equation and the frequency
//! integral of the resolvent.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SMatrix, Vector2, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B, SQL};
use crate::error::{Error, Result};
use crate::model::{check_stability, idx, LinearModel, Mat6};
use crate::quadrature::{integrate_real_line, integrate_vec, QuadOptions};

type CMat6 = SMatrix<Complex64, 6, 6>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmMethod {
    Lyapunov,
    FrequencyIntegral,
}

/// Symmetrized second moments `σ_ij = ⟨{v_i, v_j}⟩/2` of the fluctuation vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    pub sigma: Mat6,
    pub method: CmMethod,
}

/// Three-mode symplectic form `⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form() -> Mat6 {
    let mut omega = Mat6::zeros();
    for m in 0..3 {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

impl CovarianceMatrix {
    pub fn new(sigma: Mat6, method: CmMethod) -> Self {
        CovarianceMatrix { sigma, method }
    }

    pub fn norm(&self) -> f64 {
        self.sigma.amax()
    }

    /// 2×2 block of the cavity quadratures `(δX, δY)`.
    pub fn cavity_block(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(idx::X, idx::X).into_owned()
    }

    /// 4×4 block of `(δX, δY, δx, δy)`, the state left after tracing out the mirror.
    pub fn cavity_atom_block(&self) -> Matrix4<f64> {
        self.sigma.fixed_view::<4, 4>(idx::X, idx::X).into_owned()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (self.sigma - self.sigma.transpose()).amax()
    }

    /// Smallest eigenvalue of the Hermitian matrix `σ + iΩ₃/2`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let omega = symplectic_form();
        let h = CMat6::from_fn(|i, j| Complex64::new(self.sigma[(i, j)], 0.5 * omega[(i, j)]));
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks symmetry, positivity of the diagonal and the uncertainty relation.
    pub fn validate(&self) -> Result<()> {
        let n = self.norm();
        if self.symmetry_defect() > 1e-12 * n {
            return Err(Error::numerical("covariance", format!("asymmetry {:.3e}", self.symmetry_defect())));
        }
        if (0..6).any(|i| !(self.sigma[(i, i)] > 0.0)) {
            return Err(Error::numerical("covariance", "non-positive diagonal entry"));
        }
        let lam = self.uncertainty_min_eigenvalue();
        if lam < -1e-9 * n {
            return Err(Error::numerical(
                "covariance",
                format!("uncertainty relation violated: min eig(σ + iΩ/2) = {lam:.3e}"),
            ));
        }
        Ok(())
    }
}

/// Position of the unique entry `(i, j)`, `i ≤ j`, in the packed upper triangle.
fn packed(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * 6 - i * (i + 1) / 2 + j
}

fn unpack(v: &DVector<f64>) -> Mat6 {
    Mat6::from_fn(|i, j| v[packed(i, j)])
}

fn lyapunov_residual(k: &Mat6, sigma: &Mat6, d: &Mat6) -> Mat6 {
    k * sigma + sigma * k.transpose() + d
}

/// Solves `Kσ + σKᵀ = −D` for symmetric `σ` as a 21-unknown linear system.
pub fn steady_cm_lyapunov(k: &Mat6, d: &Mat6) -> Result<CovarianceMatrix> {
    let stability = check_stability(k)?;
    if !stability.stable {
        return Err(stability.into_error());
    }
    // Common scaling of K and D leaves σ unchanged and tames the conditioning.
    let s = 1.0 / k.amax();
    let ks = k * s;
    let ds = d * s;

    let mut a = DMatrix::<f64>::zeros(21, 21);
    for i in 0..6 {
        for j in i..6 {
            let row = packed(i, j);
            for m in 0..6 {
                a[(row, packed(m, j))] += ks[(i, m)];
                a[(row, packed(i, m))] += ks[(j, m)];
            }
        }
    }
    let lu = a.lu();
    let mut rhs = DVector::<f64>::zeros(21);
    for i in 0..6 {
        for j in i..6 {
            rhs[packed(i, j)] = -ds[(i, j)];
        }
    }
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("steady_cm_lyapunov", "singular Lyapunov operator"))?;
    // Two rounds of iterative refinement.
    for _ in 0..2 {
        let r = lyapunov_residual(&ks, &unpack(&x), &ds);
        let mut rr = DVector::<f64>::zeros(21);
        for i in 0..6 {
            for j in i..6 {
                rr[packed(i, j)] = -r[(i, j)];
            }
        }
        if let Some(dx) = lu.solve(&rr) {
            x += dx;
        }
    }
    let sigma = unpack(&x);
    let residual = lyapunov_residual(k, &sigma, d).amax();
    let scale = d.amax().max(f64::MIN_POSITIVE);
    if !(residual <= 1e-10 * scale) {
        return Err(Error::numerical(
            "steady_cm_lyapunov",
            format!("residual {residual:.3e} exceeds 1e-10·‖D‖ = {:.3e}", 1e-10 * scale),
        ));
    }
    Ok(CovarianceMatrix::new(sigma, CmMethod::Lyapunov))
}

/// Steady state of a model through the Lyapunov route.
pub fn steady_state(model: &LinearModel) -> Result<CovarianceMatrix> {
    model.require_stable()?;
    steady_cm_lyapunov(&model.drift, &model.diffusion)
}

/// Spectral density of the mechanical Langevin force.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Delta-correlated limit, `γ_m(2n̄+1)`.
    White,
    /// Symmetrized ohmic spectrum `(γ_m ω/ω_m)·coth(ħω/(2k_B T))`.
    Brownian,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::White
    }
}

/// Symmetrized Brownian spectral density at angular frequency `omega`.
pub fn brownian_spectral_density(gamma_m: f64, omega_m: f64, temperature: f64, omega: f64) -> f64 {
    if temperature <= 0.0 {
        return gamma_m * omega.abs() / omega_m;
    }
    let x = HBAR * omega / (2.0 * K_B * temperature);
    if x.abs() < 1e-6 {
        // ω·coth(aω) → 1/a + aω²/3
        let a = HBAR / (2.0 * K_B * temperature);
        return gamma_m / omega_m * (1.0 / a + a * omega * omega / 3.0);
    }
    gamma_m * omega / omega_m / x.tanh()
}

/// Per-frequency diagonal noise matrix for a model.
pub fn noise_diagonal(model: &LinearModel, noise: NoiseModel, omega: f64) -> Vector6<f64> {
    let mut n = model.diffusion.diagonal();
    if let NoiseModel::Brownian = noise {
        let p = &model.params;
        n[idx::P] = brownian_spectral_density(p.gamma_m, p.omega_m, p.temperature, omega);
    }
    n
}

/// Frequency range for the covariance integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrequencyWindow {
    /// Whole real line through a tangent map.
    RealLine,
    /// `|ω| ≤ cutoff`.
    Symmetric(f64),
}

/// `(−iωI − K)⁻¹`, the response of the fluctuations to the noise.
pub fn resolvent(k: &Mat6, omega: f64) -> Option<CMat6> {
    let m = CMat6::from_fn(|i, j| {
        let diag = if i == j { Complex64::new(0.0, -omega) } else { Complex64::new(0.0, 0.0) };
        diag - Complex64::new(k[(i, j)], 0.0)
    });
    m.try_inverse()
}

/// Integrates `σ = (1/2π)∫ T(ω) N(ω) T(ω)† dω` with adaptive Gauss–Kronrod.
///
/// `noise(ω)` returns the diagonal of the (real, symmetrized) noise spectral
/// matrix. Resonances at the eigenfrequencies are used as panel breaks.
pub fn steady_cm_frequency<N>(k: &Mat6, noise: N, window: FrequencyWindow, rel_tol: f64) -> Result<CovarianceMatrix>
where
    N: Fn(f64) -> Vector6<f64>,
{
    let stability = check_stability(k)?;
    if !stability.stable {
        return Err(stability.into_error());
    }
    let mut breaks: Vec<f64> = Vec::new();
    for &(_, im) in &stability.eigenvalues {
        breaks.push(im);
        breaks.push(-im);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let scale = stability.max_abs().max(f64::MIN_POSITIVE);

    let mut failure: Option<f64> = None;
    let integrand = |omega: f64, out: &mut [f64]| {
        let Some(t) = resolvent(k, omega) else {
            failure.get_or_insert(omega);
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        };
        let n = noise(omega);
        for i in 0..6 {
            for j in i..6 {
                let mut acc = 0.0;
                for m in 0..6 {
                    acc += n[m] * (t[(i, m)] * t[(j, m)].conj()).re;
                }
                out[packed(i, j)] = acc;
            }
        }
    };
    let opts = QuadOptions {
        rel_tol,
        abs_tol: 0.0,
        max_subdivisions: 50_000,
    };
    let result = match window {
        FrequencyWindow::RealLine => integrate_real_line(integrand, 21, scale, &breaks, &opts),
        FrequencyWindow::Symmetric(cutoff) => integrate_vec(integrand, 21, -cutoff, cutoff, &breaks, &opts),
    };
    if let Some(w) = failure {
        return Err(Error::numerical("steady_cm_frequency", format!("singular resolvent at ω = {w:.6e}")));
    }
    let norm = result.value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if result.error > 1e-6 * norm {
        return Err(Error::numerical(
            "steady_cm_frequency",
            format!("quadrature error estimate {:.3e} relative", result.error / norm),
        ));
    }
    let v = DVector::from_vec(result.value);
    let sigma = unpack(&v) / (2.0 * std::f64::consts::PI);
    Ok(CovarianceMatrix::new(sigma, CmMethod::FrequencyIntegral))
}

/// Frequency-integral steady state of a model. White noise integrates over
/// the whole line; the Brownian spectrum grows with `|ω|` and is cut off at
/// `50·max(ω_m, |Δ_a|, κ, χ_eff)`.
pub fn steady_state_frequency(model: &LinearModel, noise: NoiseModel) -> Result<CovarianceMatrix> {
    model.require_stable()?;
    let window = match noise {
        NoiseModel::White => FrequencyWindow::RealLine,
        NoiseModel::Brownian => {
            let p = &model.params;
            let w = p.omega_m.max(p.delta_a.abs()).max(p.kappa).max(model.chi_eff);
            FrequencyWindow::Symmetric(50.0 * w)
        }
    };
    steady_cm_frequency(&model.drift, |w| noise_diagonal(model, noise, w), window, 1e-10)
}

/// Cavity quadrature variances and their squeezing relative to the SQL.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub var_x: f64,
    pub var_y: f64,
    pub sql: f64,
    pub squeezing_db_x: f64,
    pub squeezing_db_y: f64,
}

impl QuadratureReport {
    pub fn from_variances(var_x: f64, var_y: f64) -> Self {
        QuadratureReport {
            var_x,
            var_y,
            sql: SQL,
            squeezing_db_x: to_db(var_x),
            squeezing_db_y: to_db(var_y),
        }
    }
}

/// `10·log10(var/SQL)`.
pub fn to_db(var: f64) -> f64 {
    10.0 * (var / SQL).log10()
}

pub fn quadrature_report(cm: &CovarianceMatrix) -> QuadratureReport {
    QuadratureReport::from_variances(cm.sigma[(idx::X, idx::X)], cm.sigma[(idx::Y, idx::Y)])
}

/// `ζ(p) = exp(−pᵀσp)`.
pub fn joint_characteristic(cm: &CovarianceMatrix, point: &Vector6<f64>) -> f64 {
    (-(point.transpose() * cm.sigma * point)[(0, 0)]).exp()
}

/// Characteristic function of the cavity marginal at `λ = X + iY`.
pub fn cavity_characteristic(cm: &CovarianceMatrix, x: f64, y: f64) -> f64 {
    let v = Vector2::new(x, y);
    (-(v.transpose() * cm.cavity_block() * v)[(0, 0)]).exp()
}
