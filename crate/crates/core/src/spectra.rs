//! Output-field quadrature spectra through the input–output relation
//! `b_out = √(2κ)·b − b_in`, and the optimal squeezing spectrum over all
//! quadrature angles.

use std::io::Write;

use nalgebra::{Matrix2, SMatrix, Vector5};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::SQL;
use crate::error::{Error, Result};
use crate::gaussian::{brownian_spectral_density, resolvent, to_db, CmMethod, CovarianceMatrix, NoiseModel};
use crate::model::{idx, LinearModel, Mat6};

type CMat6 = SMatrix<Complex64, 6, 6>;
type Row5 = SMatrix<Complex64, 1, 5>;

/// `(−iωI − K)⁻¹`.
pub fn fluctuation_transfer(k: &Mat6, omega: f64) -> Result<CMat6> {
    resolvent(k, omega)
        .ok_or_else(|| Error::numerical("fluctuation_transfer", format!("−iωI − K is singular at ω = {omega:.6e}")))
}

/// Spectral densities of the five independent inputs `(ξ, X_in, Y_in, x_in, y_in)`.
fn input_noise(model: &LinearModel, noise: NoiseModel, omega: f64) -> Vector5<f64> {
    let p = &model.params;
    let xi = match noise {
        NoiseModel::White => p.gamma_m * (2.0 * model.n_bar + 1.0),
        NoiseModel::Brownian => brownian_spectral_density(p.gamma_m, p.omega_m, p.temperature, omega),
    };
    Vector5::new(xi, 0.5, 0.5, 0.5, 0.5)
}

/// Response rows of the light and atomic output quadratures to the inputs,
/// ordered `(X_out, Y_out, x_out, y_out)`.
fn output_rows(model: &LinearModel, t: &CMat6) -> [Row5; 4] {
    let p = &model.params;
    let (rk, ra) = ((2.0 * p.kappa).sqrt(), (2.0 * p.gamma_a).sqrt());
    // Input coupling: ξ drives δp, the vacuum inputs enter through √(2κ), √(2γ_a).
    let gain = [(idx::P, 1.0), (idx::X, rk), (idx::Y, rk), (idx::XA, ra), (idx::YA, ra)];
    let row = |out: usize, loss: f64, own_input: usize| {
        let mut r = Row5::from_fn(|_, j| {
            let (col, g) = gain[j];
            t[(out, col)] * (loss * g)
        });
        r[own_input] -= Complex64::new(1.0, 0.0);
        r
    };
    [row(idx::X, rk, 1), row(idx::Y, rk, 2), row(idx::XA, ra, 3), row(idx::YA, ra, 4)]
}

fn cross(a: &Row5, b: &Row5, n: &Vector5<f64>) -> f64 {
    (0..5).map(|j| n[j] * (a[j] * b[j].conj()).re).sum()
}

/// Optimal-angle spectrum: the smallest eigenvalue of `[[S_X, S_XY], [S_XY, S_Y]]`, in a
/// form free of cancellation.
pub fn optimal_spectrum(s_x: f64, s_y: f64, s_xy: f64) -> f64 {
    let root = ((s_x - s_y).powi(2) + 4.0 * s_xy * s_xy).sqrt();
    (2.0 * s_x * s_y - 2.0 * s_xy * s_xy) / (s_x + s_y + root)
}

/// Output spectra at one frequency: `(S_X, S_Y, S_XY)`.
pub fn output_point(model: &LinearModel, noise: NoiseModel, omega: f64) -> Result<(f64, f64, f64)> {
    let t = fluctuation_transfer(&model.drift, omega)?;
    let n = input_noise(model, noise, omega);
    let [rx, ry, _, _] = output_rows(model, &t);
    Ok((cross(&rx, &rx, &n), cross(&ry, &ry, &n), cross(&rx, &ry, &n)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub s_x: Vec<f64>,
    pub s_y: Vec<f64>,
    pub s_xy: Vec<f64>,
    pub s_opt: Vec<f64>,
    pub s_opt_db: Vec<f64>,
}

impl SpectrumResult {
    /// `(ω, dB)` of the deepest optimal squeezing on the axis.
    pub fn min_opt_db(&self) -> (f64, f64) {
        self.s_opt_db
            .iter()
            .zip(&self.omega)
            .fold((f64::NAN, f64::INFINITY), |best, (&db, &w)| if db < best.1 { (w, db) } else { best })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "omega,s_x,s_y,s_xy,s_opt,s_opt_db")?;
        for i in 0..self.omega.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.omega[i], self.s_x[i], self.s_y[i], self.s_xy[i], self.s_opt[i], self.s_opt_db[i]
            )?;
        }
        Ok(())
    }
}

pub const DEFAULT_SPECTRUM_POINTS: usize = 2048;

/// `n` evenly spaced points on `[−5ω_m, 5ω_m]`.
pub fn default_axis(omega_m: f64, n: usize) -> Vec<f64> {
    linspace(-5.0 * omega_m, 5.0 * omega_m, n)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Output spectra over `axis`, evaluated in parallel and returned in axis order.
pub fn output_spectra(model: &LinearModel, axis: &[f64], noise: NoiseModel) -> Result<SpectrumResult> {
    model.require_stable()?;
    let points: Vec<(f64, f64, f64)> = axis
        .par_iter()
        .map(|&w| output_point(model, noise, w))
        .collect::<Result<_>>()?;
    let mut r = SpectrumResult {
        omega: axis.to_vec(),
        s_x: Vec::with_capacity(axis.len()),
        s_y: Vec::with_capacity(axis.len()),
        s_xy: Vec::with_capacity(axis.len()),
        s_opt: Vec::with_capacity(axis.len()),
        s_opt_db: Vec::with_capacity(axis.len()),
    };
    for (sx, sy, sxy) in points {
        let opt = optimal_spectrum(sx, sy, sxy);
        r.s_x.push(sx);
        r.s_y.push(sy);
        r.s_xy.push(sxy);
        r.s_opt.push(opt);
        r.s_opt_db.push(to_db(opt));
    }
    Ok(r)
}

/// Intracavity spectral matrix of `(δX, δY)`, whose integral over `ω/2π` is
/// the cavity block of the steady-state covariance.
pub fn intracavity_spectrum(model: &LinearModel, noise: NoiseModel, omega: f64) -> Result<Matrix2<f64>> {
    let t = fluctuation_transfer(&model.drift, omega)?;
    let n = crate::gaussian::noise_diagonal(model, noise, omega);
    let entry = |i: usize, j: usize| (0..6).map(|m| n[m] * (t[(i, m)] * t[(j, m)].conj()).re).sum::<f64>();
    let (sxx, syy, sxy) = (entry(idx::X, idx::X), entry(idx::Y, idx::Y), entry(idx::X, idx::Y));
    Ok(Matrix2::new(sxx, sxy, sxy, syy))
}

/// Experimental: covariance of the zero-width spectral modes of the light
/// and atomic output fields at `omega`, arranged like a steady-state CM so
/// the conditioning machinery can be applied to it. The mechanical block is
/// set to vacuum and decoupled; only the light–atom block is meaningful.
/// This is an approximation to a filtered temporal output mode.
pub fn output_mode_covariance(model: &LinearModel, noise: NoiseModel, omega: f64) -> Result<CovarianceMatrix> {
    model.require_stable()?;
    let t = fluctuation_transfer(&model.drift, omega)?;
    let n = input_noise(model, noise, omega);
    let rows = output_rows(model, &t);
    let mut sigma = Mat6::identity() * SQL;
    for a in 0..4 {
        for b in 0..4 {
            sigma[(idx::X + a, idx::X + b)] = cross(&rows[a], &rows[b], &n);
        }
    }
    let sigma = (sigma + sigma.transpose()) * 0.5;
    Ok(CovarianceMatrix::new(sigma, CmMethod::FrequencyIntegral))
}
