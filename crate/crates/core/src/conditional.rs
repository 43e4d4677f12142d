//! Conditioning the cavity on a count of `s` atomic excitations, and the
//! Wigner function of the resulting (generally non-Gaussian) field state.
//!
//! For the reduced cavity–atom Gaussian state with covariance
//! `[[A, C], [Cᵀ, B]]` the unnormalized conditional characteristic function
//! has the closed form
//!
//! ```text
//! G_s(β) = exp(−βᵀ(A − C M⁻¹ Cᵀ)β) · π/√det M · E[L_s(|γ|²)],   M = B + I/2,
//! ```
//!
//! with `γ ~ N(−M⁻¹Cᵀβ, M⁻¹/2)` and `L_s` the Laguerre polynomial. The
//! Gaussian moments come from Stein's recursion, so no numerical integration
//! is involved.

use std::io::Write;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Below this `G_s(0)` the outcome is treated as impossible.
pub const MIN_G0: f64 = 1e-300;

/// Coefficients of `L_s(x) = Σ_k c_k x^k`.
pub fn laguerre_coefficients(s: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(s + 1);
    let mut binom = 1.0;
    let mut fact = 1.0;
    for k in 0..=s {
        if k > 0 {
            binom *= (s + 1 - k) as f64 / k as f64;
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c.push(sign * binom / fact);
    }
    c
}

/// Arithmetic needed by the moment recursion; lets the same code run on
/// plain numbers and on truncated power series.
trait Ring: Copy + Add<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> {
    fn constant(c: f64) -> Self;
}

impl Ring for f64 {
    fn constant(c: f64) -> Self {
        c
    }
}

/// Power series in `t` truncated after `t²`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Series2([f64; 3]);

impl Add for Series2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Series2([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Mul for Series2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.0, o.0);
        Series2([a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[0] * b[2] + a[1] * b[1] + a[2] * b[0]])
    }
}

impl Mul<f64> for Series2 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Series2([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }
}

impl Ring for Series2 {
    fn constant(c: f64) -> Self {
        Series2([c, 0.0, 0.0])
    }
}

/// `E[L_s(γ₁² + γ₂²)]` for `γ ~ N(μ, P)`.
fn laguerre_expectation<T: Ring>(mu: [T; 2], p: &Matrix2<f64>, coeffs: &[f64]) -> T {
    let s = coeffs.len() - 1;
    let n = 2 * s + 1;
    let zero = T::constant(0.0);
    // m[a][b] = E[γ₁^a γ₂^b]
    let mut m = vec![vec![zero; n]; n];
    for a in 0..n {
        for b in 0..n - a {
            m[a][b] = if a == 0 && b == 0 {
                T::constant(1.0)
            } else if a > 0 {
                let mut r = mu[0] * m[a - 1][b];
                if a >= 2 {
                    r = r + m[a - 2][b] * (p[(0, 0)] * (a - 1) as f64);
                }
                if b >= 1 {
                    r = r + m[a - 1][b - 1] * (p[(0, 1)] * b as f64);
                }
                r
            } else {
                let mut r = mu[1] * m[0][b - 1];
                if b >= 2 {
                    r = r + m[0][b - 2] * (p[(1, 1)] * (b - 1) as f64);
                }
                r
            };
        }
    }
    let mut total = zero;
    let mut binom_row = vec![1.0f64];
    for (k, &ck) in coeffs.iter().enumerate() {
        if k > 0 {
            let mut next = vec![1.0; k + 1];
            for j in 1..k {
                next[j] = binom_row[j - 1] + binom_row[j];
            }
            binom_row = next;
        }
        // E[(γ₁² + γ₂²)^k]
        let mut ek = zero;
        for (j, &bj) in binom_row.iter().enumerate() {
            ek = ek + m[2 * j][2 * (k - j)] * bj;
        }
        total = total + ek * ck;
    }
    total
}

/// Precomputed pieces of `G_s` for a fixed Gaussian state and count `s`.
///
/// The Laguerre sum alternates in sign, so absolute accuracy degrades for
/// large counts; it stays near machine precision for `s` up to about 10.
#[derive(Clone, Debug)]
pub struct GsKernel {
    pub s: usize,
    /// `A − C M⁻¹ Cᵀ`.
    pub a_eff: Matrix2<f64>,
    /// `−M⁻¹ Cᵀ`, mapping `β` to the mean of `γ`.
    mean_map: Matrix2<f64>,
    /// `M⁻¹/2`.
    p: Matrix2<f64>,
    prefactor: f64,
    coeffs: Vec<f64>,
}

impl GsKernel {
    /// Builds the kernel from the 4×4 cavity–atom block `(δX, δY, δx, δy)`.
    pub fn new(block: &Matrix4<f64>, s: usize) -> Result<Self> {
        let a = block.fixed_view::<2, 2>(0, 0).into_owned();
        let c = block.fixed_view::<2, 2>(0, 2).into_owned();
        let b = block.fixed_view::<2, 2>(2, 2).into_owned();
        let m = b + Matrix2::identity() * 0.5;
        let det = m.determinant();
        if !(det > 0.0) {
            return Err(Error::numerical("g_s_function", format!("det(B + I/2) = {det:.3e} is not positive")));
        }
        let m_inv = m
            .try_inverse()
            .ok_or_else(|| Error::numerical("g_s_function", "B + I/2 is singular"))?;
        let a_eff = a - c * m_inv * c.transpose();
        let a_eff = (a_eff + a_eff.transpose()) * 0.5;
        Ok(GsKernel {
            s,
            a_eff,
            mean_map: -(m_inv * c.transpose()),
            p: (m_inv + m_inv.transpose()) * 0.25,
            prefactor: std::f64::consts::PI / det.sqrt(),
            coeffs: laguerre_coefficients(s),
        })
    }

    pub fn from_cm(cm: &CovarianceMatrix, s: usize) -> Result<Self> {
        Self::new(&cm.cavity_atom_block(), s)
    }

    /// `G_s(β)` with `β = (Re λ, Im λ)`.
    pub fn eval(&self, beta: &Vector2<f64>) -> f64 {
        let mu = self.mean_map * beta;
        let gauss = (-(beta.transpose() * self.a_eff * beta)[(0, 0)]).exp();
        if gauss == 0.0 {
            return 0.0;
        }
        gauss * self.prefactor * laguerre_expectation([mu[0], mu[1]], &self.p, &self.coeffs)
    }

    /// `G_s(0)`; the outcome probability is `G_s(0)/π`.
    pub fn at_origin(&self) -> f64 {
        self.prefactor * laguerre_expectation([0.0, 0.0], &self.p, &self.coeffs)
    }

    /// Curvature `−½ ∂²ln G_s(t·d)/∂t²` at `t = 0`, i.e. the conditional
    /// quadrature variance along the unit direction `d`.
    fn directional_variance(&self, d: &Vector2<f64>) -> f64 {
        let mu = self.mean_map * d;
        let e = laguerre_expectation(
            [Series2([0.0, mu[0], 0.0]), Series2([0.0, mu[1], 0.0])],
            &self.p,
            &self.coeffs,
        );
        let a = (d.transpose() * self.a_eff * d)[(0, 0)];
        // G(t) ∝ (1 − a t²)(e₀ + e₂ t²) and the linear term vanishes by parity.
        a - e.0[2] / e.0[0]
    }

    /// Conditional covariance of the cavity quadratures, from the curvature
    /// of the characteristic function at the origin.
    pub fn conditional_covariance(&self) -> Matrix2<f64> {
        let vx = self.directional_variance(&Vector2::new(1.0, 0.0));
        let vy = self.directional_variance(&Vector2::new(0.0, 1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let vd = self.directional_variance(&Vector2::new(h, h));
        let cxy = vd - 0.5 * (vx + vy);
        Matrix2::new(vx, cxy, cxy, vy)
    }
}

/// `G_s(λ)` for the steady state `cm`, with `λ = X + iY`.
pub fn g_s_function(cm: &CovarianceMatrix, s: usize, beta: Complex64) -> Result<f64> {
    Ok(GsKernel::from_cm(cm, s)?.eval(&Vector2::new(beta.re, beta.im)))
}

/// Normalized conditional characteristic function `ζ(λ) = G_s(λ)/G_s(0)`.
#[derive(Clone, Debug)]
pub struct ConditionalField {
    pub kernel: GsKernel,
    pub g0: f64,
    /// Cavity block of the state before conditioning.
    pub sigma_in: Matrix2<f64>,
}

impl ConditionalField {
    pub fn new(kernel: GsKernel, sigma_in: Matrix2<f64>) -> Result<Self> {
        let g0 = kernel.at_origin();
        if !(g0 >= MIN_G0) {
            return Err(Error::ZeroProbability { s: kernel.s, g0 });
        }
        Ok(ConditionalField { kernel, g0, sigma_in })
    }

    pub fn s(&self) -> usize {
        self.kernel.s
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.kernel.eval(&Vector2::new(x, y)) / self.g0
    }

    /// Probability of the count `s`.
    pub fn probability(&self) -> f64 {
        self.g0 / std::f64::consts::PI
    }

    pub fn covariance(&self) -> Matrix2<f64> {
        self.kernel.conditional_covariance()
    }
}

pub fn conditional_characteristic(cm: &CovarianceMatrix, s: usize) -> Result<ConditionalField> {
    ConditionalField::new(GsKernel::from_cm(cm, s)?, cm.cavity_block())
}

/// Wigner function sampled on a square grid `[−h, h]²`; `values[i][j]` is at
/// `(x_i, y_j)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerGrid {
    pub half_width: f64,
    pub n_points: usize,
    pub dx: f64,
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `Σ W dx²`.
    pub fn mass(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.dx * self.dx
    }

    /// JSON object with the grid metadata and a flat row-major `values` array.
    pub fn write_json<W: Write>(&self, out: W, s: usize, probability: f64) -> Result<()> {
        let flat: Vec<f64> = self.values.iter().flatten().copied().collect();
        let doc = serde_json::json!({
            "half_width": self.half_width,
            "n_points": self.n_points,
            "dx": self.dx,
            "s": s,
            "probability": probability,
            "layout": "row-major, row index along x",
            "values": flat,
        });
        serde_json::to_writer(out, &doc)?;
        Ok(())
    }

    /// Rows `x,y,w` with a header, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,w")?;
        for i in 0..self.n_points {
            let x = self.coordinate(i);
            for j in 0..self.n_points {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", x, self.coordinate(j), self.values[i][j])?;
            }
        }
        Ok(())
    }
}

/// Default grid half-width: six standard deviations of the broader of the
/// unconditioned and conditioned states (counting can broaden a quadrature).
pub fn default_half_width(field: &ConditionalField) -> f64 {
    let vin = field.sigma_in.symmetric_eigenvalues().max();
    let vout = field.covariance().symmetric_eigenvalues().max();
    6.0 * vin.max(vout).max(0.5).sqrt()
}

pub const DEFAULT_GRID_POINTS: usize = 513;
const MAX_DUAL_POINTS: usize = 8193;

/// `W(v) = (2/(2π)²)∫ ζ(u) exp(−i√2 u·v) d²u`, evaluated as a dense
/// trapezoidal transform on a dual grid sized from the decay of `ζ`.
///
/// The convention gives `W(v) = e^{−|v|²}/π` for vacuum, whose quadrature
/// variance is `1/2`. The result is renormalized to unit mass.
pub fn wigner_grid(field: &ConditionalField, half_width: f64, n_points: usize) -> Result<WignerGrid> {
    if !(half_width > 0.0 && half_width.is_finite()) || n_points < 3 || n_points % 2 == 0 {
        return Err(Error::Domain(format!(
            "grid needs half_width > 0 and an odd n_points >= 3, got {half_width} and {n_points}"
        )));
    }
    let eig = field.kernel.a_eff.symmetric_eigenvalues();
    let (lmin, lmax) = (eig.min(), eig.max());
    if !(lmin > 0.0) {
        return Err(Error::numerical("wigner_grid", format!("characteristic function does not decay (λmin = {lmin:.3e})")));
    }
    // Alias images sit 2.5 half-widths away; sample ζ finely across its core.
    let du = (std::f64::consts::PI / (std::f64::consts::SQRT_2 * 1.25 * half_width)).min(0.3 / lmax.sqrt());
    let mut extent = ((1e8f64).ln() + 4.0 * field.s() as f64) / lmin;
    extent = extent.sqrt();
    let mut nd;
    let mut z;
    loop {
        nd = (extent / du).ceil() as usize;
        let m = 2 * nd + 1;
        if m > MAX_DUAL_POINTS {
            return Err(Error::numerical("wigner_grid", format!("dual grid would need {m} points per axis")));
        }
        z = DMatrix::<f64>::from_fn(m, m, |k, l| {
            field.eval((k as f64 - nd as f64) * du, (l as f64 - nd as f64) * du)
        });
        let mut edge = 0.0f64;
        for k in 0..m {
            edge = edge.max(z[(0, k)].abs()).max(z[(m - 1, k)].abs()).max(z[(k, 0)].abs()).max(z[(k, m - 1)].abs());
        }
        if edge < 1e-8 {
            break;
        }
        extent *= 1.25;
    }
    let m = 2 * nd + 1;
    let dx = 2.0 * half_width / (n_points - 1) as f64;
    let sq2 = std::f64::consts::SQRT_2;
    let cos = DMatrix::<f64>::from_fn(n_points, m, |i, k| {
        (sq2 * (-half_width + i as f64 * dx) * (k as f64 - nd as f64) * du).cos()
    });
    let sin = DMatrix::<f64>::from_fn(n_points, m, |i, k| {
        (sq2 * (-half_width + i as f64 * dx) * (k as f64 - nd as f64) * du).sin()
    });
    let zc = &z * cos.transpose();
    let zs = &z * sin.transpose();
    let w = &cos * &zc - &sin * &zs;
    let imag = &cos * &zs + &sin * &zc;
    let wmax = w.amax();
    if imag.amax() > 1e-8 * wmax {
        return Err(Error::numerical(
            "wigner_grid",
            format!("imaginary residue {:.3e} of max|W|; ζ is not even", imag.amax() / wmax),
        ));
    }
    let mass: f64 = w.sum() * dx * dx;
    if !(mass > 0.0) {
        return Err(Error::numerical("wigner_grid", format!("non-positive total mass {mass:.3e}")));
    }
    let values = (0..n_points)
        .map(|i| (0..n_points).map(|j| w[(i, j)] / mass).collect())
        .collect();
    Ok(WignerGrid {
        half_width,
        n_points,
        dx,
        values,
    })
}

/// First and second moments of a sampled Wigner function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMoments {
    pub mass: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

/// Moments by direct summation. Fails if `W` has not decayed at the edge.
pub fn conditional_moments(grid: &WignerGrid) -> Result<GridMoments> {
    let n = grid.n_points;
    let max = grid.max_abs();
    let mut edge = 0.0f64;
    for k in 0..n {
        edge = edge
            .max(grid.values[0][k].abs())
            .max(grid.values[n - 1][k].abs())
            .max(grid.values[k][0].abs())
            .max(grid.values[k][n - 1].abs());
    }
    if edge > 1e-6 * max {
        return Err(Error::Domain(format!(
            "Wigner function at grid edge is {:.3e} of its maximum; widen the grid",
            edge / max
        )));
    }
    let area = grid.dx * grid.dx;
    let (mut m0, mut mx, mut my, mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let x = grid.coordinate(i);
        for j in 0..n {
            let y = grid.coordinate(j);
            let w = grid.values[i][j] * area;
            m0 += w;
            mx += w * x;
            my += w * y;
            mxx += w * x * x;
            myy += w * y * y;
            mxy += w * x * y;
        }
    }
    let (ax, ay) = (mx / m0, my / m0);
    Ok(GridMoments {
        mass: m0,
        mean_x: ax,
        mean_y: ay,
        var_x: mxx / m0 - ax * ax,
        var_y: myy / m0 - ay * ay,
        cov_xy: mxy / m0 - ax * ay,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    /// Integrated negative volume `∫_{W<0} |W|`.
    pub n_w: f64,
    pub min_w: f64,
    /// Share of grid points counted as negative.
    pub negative_fraction: f64,
}

/// Values above `−1e-6·max|W|` are treated as transform noise, not negativity.
pub fn negativity(grid: &WignerGrid) -> NegativityReport {
    let tol = 1e-6 * grid.max_abs();
    let mut n_w = 0.0;
    let mut count = 0usize;
    let mut min_w = f64::INFINITY;
    for &w in grid.values.iter().flatten() {
        min_w = min_w.min(w);
        if w < -tol {
            n_w += -w;
            count += 1;
        }
    }
    NegativityReport {
        n_w: n_w * grid.dx * grid.dx,
        min_w,
        negative_fraction: count as f64 / (grid.n_points * grid.n_points) as f64,
    }
}
