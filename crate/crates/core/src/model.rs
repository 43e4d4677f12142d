//! Linearized dynamics of the atom–cavity–mirror system.
//!
//! Fluctuations are ordered `(δq, δp, δX, δY, δx, δy)`: mirror position and
//! momentum, cavity amplitude and phase quadratures, and the two quadratures of
//! the collective atomic (Holstein–Primakoff) mode.

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, EPSILON_0, HBAR, K_B};
use crate::error::{Error, Result};

pub type Mat6 = SMatrix<f64, 6, 6>;

/// Indices into the fluctuation vector.
pub mod idx {
    pub const Q: usize = 0;
    pub const P: usize = 1;
    pub const X: usize = 2;
    pub const Y: usize = 3;
    pub const XA: usize = 4;
    pub const YA: usize = 5;
}

/// Raw experimental inputs, all in SI units (angular frequencies in rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Effective mirror mass (kg).
    pub mass: f64,
    /// Laser angular frequency; also used as the cavity frequency in the
    /// coupling prefactors.
    pub omega_l: f64,
    /// Pump power (W).
    pub power: f64,
    pub cavity_length: f64,
    /// Cavity amplitude decay rate.
    pub kappa: f64,
    pub gamma_a: f64,
    /// Collective atom–light coupling.
    pub g_n: f64,
    /// Effective cavity detuning including the radiation-pressure shift.
    pub delta_c_tilde: f64,
    pub delta_a: f64,
    /// Bath temperature (K).
    pub temperature: f64,
}

impl PhysicalParams {
    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI * C_LIGHT / self.omega_l
    }

    pub fn omega_from_wavelength(lambda: f64) -> f64 {
        2.0 * std::f64::consts::PI * C_LIGHT / lambda
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("mass", self.mass),
            ("omega_l", self.omega_l),
            ("power", self.power),
            ("cavity_length", self.cavity_length),
            ("kappa", self.kappa),
            ("gamma_a", self.gamma_a),
            ("g_n", self.g_n),
            ("delta_c_tilde", self.delta_c_tilde),
            ("delta_a", self.delta_a),
            ("temperature", self.temperature),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        let positive = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("mass", self.mass),
            ("omega_l", self.omega_l),
            ("cavity_length", self.cavity_length),
            ("kappa", self.kappa),
            ("gamma_a", self.gamma_a),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [
            ("power", self.power),
            ("g_n", self.g_n),
            ("temperature", self.temperature),
        ];
        for (name, v) in nonneg {
            if v < 0.0 {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Rates entering the drift and diffusion matrices for a given effective
    /// optomechanical coupling.
    pub fn rates(&self, chi_eff: f64) -> Rates {
        Rates {
            omega_m: self.omega_m,
            gamma_m: self.gamma_m,
            kappa: self.kappa,
            gamma_a: self.gamma_a,
            delta_c_tilde: self.delta_c_tilde,
            delta_a: self.delta_a,
            g_n: self.g_n,
            chi_eff,
            n_bar: thermal_occupation(self.omega_m, self.temperature),
        }
    }
}

/// The dimensionful content of the linearized model: everything the drift and
/// diffusion matrices depend on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa: f64,
    pub gamma_a: f64,
    pub delta_c_tilde: f64,
    pub delta_a: f64,
    pub g_n: f64,
    pub chi_eff: f64,
    pub n_bar: f64,
}

impl Rates {
    /// Drift matrix of `dδO/dt = K δO + n`.
    pub fn drift(&self) -> Mat6 {
        let Rates {
            omega_m: wm,
            gamma_m: gm,
            kappa: k,
            gamma_a: ga,
            delta_c_tilde: dc,
            delta_a: da,
            g_n: g,
            chi_eff: ce,
            ..
        } = *self;
        #[rustfmt::skip]
        let k = Mat6::from_row_slice(&[
            0.0, wm,  0.0, 0.0, 0.0, 0.0,
            -wm, -gm, ce,  0.0, 0.0, 0.0,
            0.0, 0.0, -k,  dc,  0.0, g,
            ce,  0.0, -dc, -k,  -g,  0.0,
            0.0, 0.0, 0.0, g,   -ga, da,
            0.0, 0.0, -g,  0.0, -da, -ga,
        ]);
        k
    }

    /// Markovian diffusion matrix `diag(0, γ_m(2n̄+1), κ, κ, γ_a, γ_a)`.
    pub fn diffusion(&self) -> Mat6 {
        Mat6::from_diagonal(&nalgebra::Vector6::new(
            0.0,
            self.gamma_m * (2.0 * self.n_bar + 1.0),
            self.kappa,
            self.kappa,
            self.gamma_a,
            self.gamma_a,
        ))
    }

    /// All rates multiplied by `c`; the occupation number is unchanged.
    pub fn scaled(&self, c: f64) -> Rates {
        Rates {
            omega_m: c * self.omega_m,
            gamma_m: c * self.gamma_m,
            kappa: c * self.kappa,
            gamma_a: c * self.gamma_a,
            delta_c_tilde: c * self.delta_c_tilde,
            delta_a: c * self.delta_a,
            g_n: c * self.g_n,
            chi_eff: c * self.chi_eff,
            n_bar: self.n_bar,
        }
    }
}

/// Single-photon optomechanical coupling `χ = (ω_c/L)·√(ħ/(m ω_m))`, with
/// `ω_c ≈ ω_l`.
pub fn single_photon_coupling(params: &PhysicalParams) -> Result<f64> {
    for (name, v) in [
        ("mass", params.mass),
        ("omega_m", params.omega_m),
        ("cavity_length", params.cavity_length),
        ("omega_l", params.omega_l),
    ] {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(params.omega_l / params.cavity_length * (HBAR / (params.mass * params.omega_m)).sqrt())
}

/// Drive amplitude `ε = √(2Pκ/(ħω_l))`.
pub fn drive_amplitude(params: &PhysicalParams) -> Result<f64> {
    if !(params.power >= 0.0) {
        return Err(Error::Domain(format!("power must be >= 0, got {}", params.power)));
    }
    if !(params.kappa > 0.0 && params.omega_l > 0.0) {
        return Err(Error::Domain("kappa and omega_l must be > 0".into()));
    }
    Ok((2.0 * params.power * params.kappa / (HBAR * params.omega_l)).sqrt())
}

/// Collective atom–cavity coupling `g_N = √N·d·√(ω_c/(2ħε₀V))`.
pub fn atom_cavity_coupling(dipole: f64, mode_volume: f64, atoms: f64, omega_c: f64) -> Result<f64> {
    for (name, v) in [
        ("dipole moment", dipole),
        ("mode volume", mode_volume),
        ("atom number", atoms),
        ("cavity frequency", omega_c),
    ] {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(atoms.sqrt() * dipole * (omega_c / (2.0 * HBAR * EPSILON_0 * mode_volume)).sqrt())
}

/// Bose occupation of the mechanical mode; zero at `T = 0`.
pub fn thermal_occupation(omega_m: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_m / (K_B * temperature);
    1.0 / x.exp_m1()
}

/// Steady-state intracavity amplitude together with the implied bare detuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyAmplitude {
    /// `|α_s|`, the phase being absorbed into the quadrature frame.
    pub alpha_s: f64,
    pub chi_eff: f64,
    /// Bare cavity–pump detuning `Δ_c = Δ̃_c + χ_eff²/(2ω_m)`.
    pub delta_c: f64,
    /// Relative residual of the nonlinear steady-state equation.
    pub residual: f64,
}

/// Residual of `α[κ + iΔ_c − iχ²α²/ω_m + g_N²/(γ_a + iΔ_a)] = ε`, relative to `ε`.
fn steady_residual(params: &PhysicalParams, chi: f64, epsilon: f64, alpha: f64, delta_c: f64) -> f64 {
    let atoms = params.g_n * params.g_n / Complex64::new(params.gamma_a, params.delta_a);
    let lhs = alpha
        * (Complex64::new(params.kappa, delta_c - chi * chi * alpha * alpha / params.omega_m) + atoms);
    if epsilon == 0.0 {
        return lhs.norm();
    }
    (lhs.norm() - epsilon).abs() / epsilon
}

/// Solves for `α_s` given the effective detuning `Δ̃_c`.
///
/// With `Δ̃_c` held fixed the radiation-pressure shift drops out and the
/// amplitude is explicit; the bare detuning is reported afterwards.
pub fn steady_state_amplitude(params: &PhysicalParams, chi: f64, epsilon: f64) -> Result<SteadyAmplitude> {
    let atoms = params.g_n * params.g_n / Complex64::new(params.gamma_a, params.delta_a);
    let denom = Complex64::new(params.kappa, params.delta_c_tilde) + atoms;
    if denom.norm() == 0.0 || !denom.is_finite() {
        return Err(Error::numerical("steady_state_amplitude", "degenerate denominator"));
    }
    let alpha_s = epsilon / denom.norm();
    let chi_eff = std::f64::consts::SQRT_2 * chi * alpha_s;
    let delta_c = params.delta_c_tilde + chi_eff * chi_eff / (2.0 * params.omega_m);
    let residual = steady_residual(params, chi, epsilon, alpha_s, delta_c);
    if !(residual < 1e-10) {
        return Err(Error::numerical(
            "steady_state_amplitude",
            format!("nonlinear equation residual {residual:.3e} exceeds 1e-10"),
        ));
    }
    Ok(SteadyAmplitude {
        alpha_s,
        chi_eff,
        delta_c,
        residual,
    })
}

pub fn build_drift(params: &PhysicalParams, chi_eff: f64) -> Mat6 {
    params.rates(chi_eff).drift()
}

pub fn build_diffusion(params: &PhysicalParams) -> Mat6 {
    params.rates(0.0).diffusion()
}

/// Eigen-analysis of a drift matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    pub max_real: f64,
    /// Eigenvalues as `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
}

impl Stability {
    pub fn eigenvalues_complex(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&(re, im)| re.hypot(im))
            .fold(0.0, f64::max)
    }

    pub fn into_error(self) -> Error {
        Error::Unstable {
            max_real: self.max_real,
            eigenvalues: self.eigenvalues_complex(),
        }
    }
}

/// Relative margin below which an eigenvalue is counted as non-decaying.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Stable iff every eigenvalue satisfies `Re λ < −1e-9·max|λ|`.
pub fn check_stability(k: &Mat6) -> Result<Stability> {
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("check_stability", "drift matrix has non-finite entries"));
    }
    let eig = k.complex_eigenvalues();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical("check_stability", "eigenvalue solver did not converge"));
    }
    let mut eigenvalues: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    eigenvalues.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let max_real = eigenvalues.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let max_abs = eigenvalues.iter().map(|e| e.0.hypot(e.1)).fold(0.0, f64::max);
    Ok(Stability {
        stable: max_real < -STABILITY_MARGIN * max_abs,
        max_real,
        eigenvalues,
    })
}

/// How `χ_eff` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSource {
    /// From the pump power through the steady-state amplitude.
    SteadyState,
    /// Prescribed directly; `α_s` and `ε` are back-computed from it.
    Prescribed,
}

/// Everything derived from [`PhysicalParams`] that the downstream solvers need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub params: PhysicalParams,
    pub chi: f64,
    pub epsilon: f64,
    pub alpha_s: f64,
    pub chi_eff: f64,
    pub delta_c: f64,
    pub n_bar: f64,
    pub source: CouplingSource,
    pub stability: Stability,
    #[serde(skip)]
    pub drift: Mat6,
    #[serde(skip)]
    pub diffusion: Mat6,
}

impl LinearModel {
    pub fn new(params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let chi = single_photon_coupling(params)?;
        let epsilon = drive_amplitude(params)?;
        let amp = steady_state_amplitude(params, chi, epsilon)?;
        Self::assemble(params, chi, epsilon, amp.alpha_s, amp.chi_eff, CouplingSource::SteadyState)
    }

    /// Builds the model with a prescribed effective coupling, as when a
    /// configuration quotes `χ_eff` instead of deriving it from the power.
    pub fn with_chi_eff(params: &PhysicalParams, chi_eff: f64) -> Result<Self> {
        params.validate()?;
        if !(chi_eff >= 0.0 && chi_eff.is_finite()) {
            return Err(Error::Domain(format!("chi_eff must be finite and >= 0, got {chi_eff}")));
        }
        let chi = single_photon_coupling(params)?;
        let alpha_s = chi_eff / (std::f64::consts::SQRT_2 * chi);
        let atoms = params.g_n * params.g_n / Complex64::new(params.gamma_a, params.delta_a);
        let epsilon = alpha_s * (Complex64::new(params.kappa, params.delta_c_tilde) + atoms).norm();
        Self::assemble(params, chi, epsilon, alpha_s, chi_eff, CouplingSource::Prescribed)
    }

    /// Model straight from rates, for scaled-down or synthetic studies where no
    /// physical prefactors are involved.
    pub fn from_rates(rates: &Rates) -> Result<Self> {
        let params = PhysicalParams {
            omega_m: rates.omega_m,
            gamma_m: rates.gamma_m,
            mass: 1.0,
            omega_l: 1.0,
            power: 0.0,
            cavity_length: 1.0,
            kappa: rates.kappa,
            gamma_a: rates.gamma_a,
            g_n: rates.g_n,
            delta_c_tilde: rates.delta_c_tilde,
            delta_a: rates.delta_a,
            temperature: 0.0,
        };
        let drift = rates.drift();
        let diffusion = rates.diffusion();
        let stability = check_stability(&drift)?;
        Ok(LinearModel {
            params,
            chi: 0.0,
            epsilon: 0.0,
            alpha_s: 0.0,
            chi_eff: rates.chi_eff,
            delta_c: rates.delta_c_tilde,
            n_bar: rates.n_bar,
            source: CouplingSource::Prescribed,
            stability,
            drift,
            diffusion,
        })
    }

    fn assemble(
        params: &PhysicalParams,
        chi: f64,
        epsilon: f64,
        alpha_s: f64,
        chi_eff: f64,
        source: CouplingSource,
    ) -> Result<Self> {
        let rates = params.rates(chi_eff);
        let drift = rates.drift();
        let diffusion = rates.diffusion();
        let stability = check_stability(&drift)?;
        Ok(LinearModel {
            params: params.clone(),
            chi,
            epsilon,
            alpha_s,
            chi_eff,
            delta_c: params.delta_c_tilde + chi_eff * chi_eff / (2.0 * params.omega_m),
            n_bar: rates.n_bar,
            source,
            stability,
            drift,
            diffusion,
        })
    }

    pub fn rates(&self) -> Rates {
        Rates {
            omega_m: self.params.omega_m,
            gamma_m: self.params.gamma_m,
            kappa: self.params.kappa,
            gamma_a: self.params.gamma_a,
            delta_c_tilde: self.params.delta_c_tilde,
            delta_a: self.params.delta_a,
            g_n: self.params.g_n,
            chi_eff: self.chi_eff,
            n_bar: self.n_bar,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.stability.stable
    }

    /// Returns an [`Error::Unstable`] unless the model is stable.
    pub fn require_stable(&self) -> Result<()> {
        if self.stability.stable {
            Ok(())
        } else {
            Err(self.stability.clone().into_error())
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Parameters of the high-temperature Wigner-plot study.
    pub(crate) fn bad_cavity_params(g_n: f64) -> PhysicalParams {
        let omega_m = 2.0 * PI * 1e7;
        PhysicalParams {
            omega_m,
            gamma_m: omega_m / 1e4,
            mass: 2e-16,
            omega_l: PhysicalParams::omega_from_wavelength(1540e-9),
            power: 2.36e-3,
            cavity_length: 1e-3,
            kappa: 2.0 * PI * 2e6,
            gamma_a: 2.0 * PI * 2e5,
            g_n,
            delta_c_tilde: 0.0,
            delta_a: -omega_m,
            temperature: 100.0,
        }
    }

    #[test]
    fn single_photon_coupling_hand_value() {
        // (2πc/λ)/L · √(ħ/(mω_m)) evaluated by hand with ħ = 1.0546e-34:
        // ω_c = 1.22317e15, √(1.0546e-34 / 1.25664e-8) = 9.1609e-14 → 1.1205e5.
        let chi = single_photon_coupling(&bad_cavity_params(0.0)).unwrap();
        assert!((chi / 1.1205e5 - 1.0).abs() < 5e-3, "chi = {chi}");
    }

    #[test]
    fn single_photon_coupling_scalings() {
        let p = bad_cavity_params(0.0);
        let chi = single_photon_coupling(&p).unwrap();
        let longer = PhysicalParams { cavity_length: 2.0 * p.cavity_length, ..p.clone() };
        let heavier = PhysicalParams { mass: 4.0 * p.mass, ..p.clone() };
        assert!((single_photon_coupling(&longer).unwrap() * 2.0 / chi - 1.0).abs() < 1e-14);
        assert!((single_photon_coupling(&heavier).unwrap() * 2.0 / chi - 1.0).abs() < 1e-14);
        let bad = PhysicalParams { mass: 0.0, ..p };
        assert!(matches!(single_photon_coupling(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn drive_amplitude_values() {
        let p = bad_cavity_params(0.0);
        // √(2·2.36e-3·1.25664e7 / (1.0546e-34·1.22317e15)) = 6.78e11
        let eps = drive_amplitude(&p).unwrap();
        assert!((eps / 6.78e11 - 1.0).abs() < 5e-3, "eps = {eps}");
        let off = PhysicalParams { power: 0.0, ..p.clone() };
        assert_eq!(drive_amplitude(&off).unwrap(), 0.0);
        let quad = PhysicalParams { power: 4.0 * p.power, ..p };
        assert!((drive_amplitude(&quad).unwrap() / (2.0 * eps) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_resonant_cavity_amplitude() {
        let p = bad_cavity_params(0.0);
        let eps = drive_amplitude(&p).unwrap();
        let chi = single_photon_coupling(&p).unwrap();
        let amp = steady_state_amplitude(&p, chi, eps).unwrap();
        assert_eq!(amp.alpha_s, eps / p.kappa);
        assert!(amp.residual < 1e-10);
        // No optomechanics: α_s = |ε/(κ + iΔ_c)|.
        let detuned = PhysicalParams { delta_c_tilde: 3.0 * p.kappa, ..p.clone() };
        let amp = steady_state_amplitude(&detuned, 0.0, eps).unwrap();
        let expected = eps / Complex64::new(p.kappa, 3.0 * p.kappa).norm();
        assert!((amp.alpha_s - expected).abs() <= 1e-15 * expected);
        assert_eq!(amp.delta_c, detuned.delta_c_tilde);
    }

    #[test]
    fn amplitude_decreases_with_atom_coupling() {
        let mut last = f64::INFINITY;
        for i in 0..20 {
            let p = bad_cavity_params(i as f64 * 2e7);
            let m = LinearModel::new(&p).unwrap();
            assert!(m.alpha_s < last);
            last = m.alpha_s;
        }
    }

    #[test]
    fn implied_bare_detuning() {
        let p = bad_cavity_params(2e8);
        let m = LinearModel::new(&p).unwrap();
        let expected = p.delta_c_tilde + m.chi_eff.powi(2) / (2.0 * p.omega_m);
        assert_eq!(m.delta_c, expected);
        let residual = steady_residual(&p, m.chi, m.epsilon, m.alpha_s, m.delta_c);
        assert!(residual < 1e-10);
    }

    #[test]
    fn decoupled_drift_blocks() {
        let p = PhysicalParams { delta_c_tilde: 0.3e7, ..bad_cavity_params(0.0) };
        let k = build_drift(&p, 0.0);
        assert_eq!(k[(0, 1)], p.omega_m);
        assert_eq!(k[(1, 0)], -p.omega_m);
        assert_eq!(k[(1, 1)], -p.gamma_m);
        assert_eq!(k[(2, 2)], -p.kappa);
        assert_eq!(k[(2, 3)], p.delta_c_tilde);
        assert_eq!(k[(3, 2)], -p.delta_c_tilde);
        assert_eq!(k[(4, 5)], p.delta_a);
        assert_eq!(k[(5, 4)], -p.delta_a);
        for i in 0..6 {
            for j in 0..6 {
                if i / 2 != j / 2 {
                    assert_eq!(k[(i, j)], 0.0, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn drift_coupling_positions_and_trace() {
        let p = bad_cavity_params(2e8);
        let k = build_drift(&p, 1.7e8);
        assert_eq!(k[(1, 2)], 1.7e8);
        assert_eq!(k[(3, 0)], 1.7e8);
        assert_eq!(k[(2, 5)], p.g_n);
        assert_eq!(k[(3, 4)], -p.g_n);
        assert_eq!(k[(4, 3)], p.g_n);
        assert_eq!(k[(5, 2)], -p.g_n);
        let expected = -p.gamma_m - 2.0 * p.kappa - 2.0 * p.gamma_a;
        assert!((k.trace() - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn diffusion_values() {
        let cold = PhysicalParams { temperature: 0.0, ..bad_cavity_params(0.0) };
        let d = build_diffusion(&cold);
        assert_eq!(d.diagonal().as_slice(), &[0.0, cold.gamma_m, cold.kappa, cold.kappa, cold.gamma_a, cold.gamma_a]);
        let hot = bad_cavity_params(0.0);
        let nbar = thermal_occupation(hot.omega_m, 100.0);
        // k_B·100/(ħ·2π·1e7) − 1/2 = 2.08366e5
        assert!((nbar / 2.08366e5 - 1.0).abs() < 1e-3, "nbar = {nbar}");
        let d = build_diffusion(&hot);
        let high_t = 2.0 * hot.gamma_m * K_B * 100.0 / (HBAR * hot.omega_m);
        assert!((d[(1, 1)] / high_t - 1.0).abs() < 1e-6);
        assert!(d.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn occupation_monotone_in_temperature() {
        let wm = 2.0 * PI * 1e7;
        assert_eq!(thermal_occupation(wm, 0.0), 0.0);
        let mut last = 0.0;
        for i in 1..200 {
            let n = thermal_occupation(wm, 1e-4 * 1.1f64.powi(i));
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn stability_of_decoupled_and_marginal() {
        let p = bad_cavity_params(0.0);
        let s = check_stability(&build_drift(&p, 0.0)).unwrap();
        assert!(s.stable);
        assert!((s.max_real + p.gamma_m / 2.0).abs() < 1e-6 * p.gamma_m);
        let lossless = Rates {
            omega_m: 1.0,
            gamma_m: 0.0,
            kappa: 0.0,
            gamma_a: 0.0,
            delta_c_tilde: 0.4,
            delta_a: -1.0,
            g_n: 0.0,
            chi_eff: 0.0,
            n_bar: 0.0,
        };
        assert!(!check_stability(&lossless.drift()).unwrap().stable);
    }

    #[test]
    fn atom_coupling_scalings() {
        let wc = PhysicalParams::omega_from_wavelength(780e-9);
        let g = atom_cavity_coupling(3.58e-29, 1e-12, 1e6, wc).unwrap();
        // 1e3 · 3.58e-29 · √(2.4151e15 / (2·1.0546e-34·8.8542e-12·1e-12)) = 4.0711e10
        assert!((g / 4.0711e10 - 1.0).abs() < 1e-3, "g = {g}");
        let g4n = atom_cavity_coupling(3.58e-29, 1e-12, 4e6, wc).unwrap();
        let g4v = atom_cavity_coupling(3.58e-29, 4e-12, 1e6, wc).unwrap();
        assert!((g4n / (2.0 * g) - 1.0).abs() < 1e-14);
        assert!((g4v * 2.0 / g - 1.0).abs() < 1e-14);
        assert!(atom_cavity_coupling(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let p = PhysicalParams { kappa: 0.0, ..bad_cavity_params(0.0) };
        assert!(matches!(LinearModel::new(&p), Err(Error::Domain(_))));
        let p = PhysicalParams { temperature: -1.0, ..bad_cavity_params(0.0) };
        assert!(matches!(LinearModel::new(&p), Err(Error::Domain(_))));
    }
}
