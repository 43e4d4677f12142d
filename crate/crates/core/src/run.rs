//! Task drivers behind the command-line verbs: single points, sweeps,
//! stability maps, Wigner grids, spectra and the pump-power search.

use std::io::Write;

use nalgebra::{Matrix2, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conditional::{
    conditional_characteristic, conditional_moments, default_half_width, negativity, wigner_grid, ConditionalField,
    GridMoments, GsKernel, NegativityReport, WignerGrid,
};
use crate::config::{apply_parameter, OptimizeConfig, Quadrature, RunConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::gaussian::{quadrature_report, steady_state, to_db, CovarianceMatrix, QuadratureReport};
use crate::model::{LinearModel, PhysicalParams};
use crate::spectra::{linspace, output_spectra, SpectrumResult};

/// Model from the power, or from a prescribed `χ_eff` when one is given.
pub fn build_model(params: &PhysicalParams, chi_eff: Option<f64>) -> Result<LinearModel> {
    match chi_eff {
        Some(c) => LinearModel::with_chi_eff(params, c),
        None => LinearModel::new(params),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionalSummary {
    pub s: usize,
    /// Probability of the count, `G_s(0)/π`.
    pub probability: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
    pub squeezing_db_x: f64,
    pub squeezing_db_y: f64,
    /// Moments taken from the Wigner grid (`true`) or from the curvature of
    /// the characteristic function at the origin.
    pub from_grid: bool,
}

impl ConditionalSummary {
    fn new(field: &ConditionalField, cov: Matrix2<f64>, from_grid: bool) -> Self {
        ConditionalSummary {
            s: field.s(),
            probability: field.probability(),
            var_x: cov[(0, 0)],
            var_y: cov[(1, 1)],
            cov_xy: cov[(0, 1)],
            squeezing_db_x: to_db(cov[(0, 0)]),
            squeezing_db_y: to_db(cov[(1, 1)]),
            from_grid,
        }
    }
}

/// Conditional variances in closed form, without a grid.
pub fn conditional_summary(cm: &CovarianceMatrix, s: usize) -> Result<ConditionalSummary> {
    let field = conditional_characteristic(cm, s)?;
    let cov = field.covariance();
    Ok(ConditionalSummary::new(&field, cov, false))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: LinearModel,
    pub covariance: [[f64; 6]; 6],
    pub quadratures: QuadratureReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional: Option<ConditionalSummary>,
}

impl SteadyReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "quantity,value")?;
        let m = &self.model;
        let mut row = |k: &str, v: f64| writeln!(out, "{k},{v:.16e}");
        row("alpha_s", m.alpha_s)?;
        row("chi", m.chi)?;
        row("epsilon", m.epsilon)?;
        row("chi_eff", m.chi_eff)?;
        row("delta_c", m.delta_c)?;
        row("n_bar", m.n_bar)?;
        row("max_real_eig", m.stability.max_real)?;
        row("var_x", self.quadratures.var_x)?;
        row("var_y", self.quadratures.var_y)?;
        row("squeezing_db_x", self.quadratures.squeezing_db_x)?;
        row("squeezing_db_y", self.quadratures.squeezing_db_y)?;
        if let Some(c) = &self.conditional {
            row("cond_s", c.s as f64)?;
            row("cond_probability", c.probability)?;
            row("cond_var_x", c.var_x)?;
            row("cond_var_y", c.var_y)?;
            row("cond_cov_xy", c.cov_xy)?;
        }
        Ok(())
    }
}

fn matrix_rows(cm: &CovarianceMatrix) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cm.sigma[(i, j)];
        }
    }
    out
}

/// Full chain for one parameter point. Conditional moments, when requested,
/// are taken from the Wigner grid.
pub fn run_steady(cfg: &RunConfig) -> Result<SteadyReport> {
    let (params, chi_eff) = cfg.params.resolve()?;
    let model = build_model(&params, chi_eff)?;
    model.require_stable()?;
    let cm = steady_state(&model)?;
    cm.validate()?;
    let conditional = if cfg.conditioning.enabled {
        let w = wigner_of(&cm, cfg)?;
        let cov = Matrix2::new(w.moments.var_x, w.moments.cov_xy, w.moments.cov_xy, w.moments.var_y);
        Some(ConditionalSummary::new(&w.field, cov, true))
    } else {
        None
    };
    Ok(SteadyReport {
        name: cfg.name.clone(),
        quadratures: quadrature_report(&cm),
        covariance: matrix_rows(&cm),
        model,
        conditional,
    })
}

/// Field of the cavity marginal with no conditioning: atoms decoupled and in
/// vacuum, so `ζ` reduces to `exp(−βᵀσ_cβ)`.
pub fn unconditional_field(cm: &CovarianceMatrix) -> Result<ConditionalField> {
    let mut block = Matrix4::identity() * 0.5;
    block.fixed_view_mut::<2, 2>(0, 0).copy_from(&cm.cavity_block());
    ConditionalField::new(GsKernel::new(&block, 0)?, cm.cavity_block())
}

pub struct WignerResult {
    pub field: ConditionalField,
    pub grid: WignerGrid,
    pub moments: GridMoments,
    pub negativity: NegativityReport,
}

fn wigner_of(cm: &CovarianceMatrix, cfg: &RunConfig) -> Result<WignerResult> {
    let field = if cfg.conditioning.enabled {
        conditional_characteristic(cm, cfg.conditioning.s)?
    } else {
        unconditional_field(cm)?
    };
    let hw = cfg.grid.half_width.unwrap_or_else(|| default_half_width(&field));
    let grid = wigner_grid(&field, hw, cfg.grid.n_points)?;
    let moments = conditional_moments(&grid)?;
    let negativity = negativity(&grid);
    Ok(WignerResult {
        field,
        grid,
        moments,
        negativity,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerSummary {
    pub s: Option<usize>,
    pub probability: f64,
    pub half_width: f64,
    pub n_points: usize,
    pub moments: GridMoments,
    /// Closed-form covariance from the characteristic function, for comparison.
    pub analytic_var_x: f64,
    pub analytic_var_y: f64,
    pub negativity: NegativityReport,
}

pub fn run_wigner(cfg: &RunConfig) -> Result<(WignerSummary, WignerGrid)> {
    let (params, chi_eff) = cfg.params.resolve()?;
    let model = build_model(&params, chi_eff)?;
    let cm = steady_state(&model)?;
    let w = wigner_of(&cm, cfg)?;
    let cov = w.field.covariance();
    let summary = WignerSummary {
        s: cfg.conditioning.enabled.then_some(cfg.conditioning.s),
        probability: w.field.probability(),
        half_width: w.grid.half_width,
        n_points: w.grid.n_points,
        moments: w.moments,
        analytic_var_x: cov[(0, 0)],
        analytic_var_y: cov[(1, 1)],
        negativity: w.negativity,
    };
    Ok((summary, w.grid))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub omega_at_min: f64,
    pub min_s_opt_db: f64,
    pub chi_eff: f64,
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<(SpectrumSummary, SpectrumResult)> {
    let (params, chi_eff) = cfg.params.resolve()?;
    let model = build_model(&params, chi_eff)?;
    let sp = cfg.spectrum.clone().unwrap_or_default();
    let axis = linspace(sp.min_omega_m * params.omega_m, sp.max_omega_m * params.omega_m, sp.n_points);
    let result = output_spectra(&model, &axis, cfg.noise)?;
    let (w, db) = result.min_opt_db();
    Ok((
        SpectrumSummary {
            omega_at_min: w,
            min_s_opt_db: db,
            chi_eff: model.chi_eff,
        },
        result,
    ))
}

/// Best pump power found by [`optimize_power`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerOptimum {
    pub power: f64,
    pub chi_eff: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub max_real: f64,
    pub evaluations: usize,
}

/// Variance of the chosen quadrature, or `None` if the point misses the
/// stability margin.
fn power_objective(params: &PhysicalParams, opt: &OptimizeConfig, power: f64) -> Option<(f64, LinearModel, CovarianceMatrix)> {
    let p = PhysicalParams { power, ..params.clone() };
    let model = LinearModel::new(&p).ok()?;
    if !(model.stability.max_real < -opt.margin * p.omega_m) {
        return None;
    }
    let cm = steady_state(&model).ok()?;
    let v = match opt.quadrature {
        Quadrature::X => cm.sigma[(2, 2)],
        Quadrature::Y => cm.sigma[(3, 3)],
    };
    v.is_finite().then_some((v, model, cm))
}

/// Minimizes the chosen quadrature variance over the pump power subject to
/// `max Re(eig K) < −margin·ω_m`: logarithmic scan, then golden-section
/// refinement around the best scan point with infeasible powers ranked last.
pub fn optimize_power(params: &PhysicalParams, opt: &OptimizeConfig) -> Result<PowerOptimum> {
    let (lo, hi) = (opt.min_power_w, opt.max_power_w);
    let mut evaluations = 0usize;
    let mut eval = |p: f64| {
        evaluations += 1;
        power_objective(params, opt, p).map(|r| r.0)
    };
    let scan: Vec<f64> = if hi > lo {
        let (a, b) = (lo.ln(), hi.ln());
        (0..opt.n_scan).map(|i| (a + (b - a) * i as f64 / (opt.n_scan - 1) as f64).exp()).collect()
    } else {
        vec![lo]
    };
    let values: Vec<Option<f64>> = scan.iter().map(|&p| eval(p)).collect();
    let best = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Domain(format!("no stable pump power in [{lo:.3e}, {hi:.3e}] W")))?;
    let (mut best_p, mut best_v) = (scan[best.0], best.1);
    if scan.len() > 1 {
        let rank = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        let mut a = scan[best.0.saturating_sub(1)].ln();
        let mut b = scan[(best.0 + 1).min(scan.len() - 1)].ln();
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (eval(c.exp()), eval(d.exp()));
        for _ in 0..80 {
            for (x, f) in [(c, fc), (d, fd)] {
                if let Some(v) = f {
                    if v < best_v {
                        best_v = v;
                        best_p = x.exp();
                    }
                }
            }
            if (b - a).abs() < 1e-12 {
                break;
            }
            if rank(fc) <= rank(fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = eval(c.exp());
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = eval(d.exp());
            }
        }
    }
    let (_, model, cm) = power_objective(params, opt, best_p).expect("best point was feasible");
    Ok(PowerOptimum {
        power: best_p,
        chi_eff: model.chi_eff,
        var_x: cm.sigma[(2, 2)],
        var_y: cm.sigma[(3, 3)],
        max_real: model.stability.max_real,
        evaluations: evaluations + 1,
    })
}

pub fn run_optimize_power(cfg: &RunConfig) -> Result<PowerOptimum> {
    let (params, _) = cfg.params.resolve()?;
    let opt = cfg
        .optimize_power
        .as_ref()
        .ok_or_else(|| Error::Config("missing optimize_power block".into()))?;
    optimize_power(&params, opt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisOutput {
    pub parameter: String,
    /// Values in the unit of the configuration.
    pub values: Vec<f64>,
    pub si_values: Vec<f64>,
}

/// One sweep point. Variances are `None` where the model is unstable or the
/// evaluation failed; the reason is kept in `error`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub coords: Vec<f64>,
    pub stable: bool,
    pub max_real: Option<f64>,
    pub var_x: Option<f64>,
    pub var_y: Option<f64>,
    pub cond_var_x: Option<f64>,
    pub cond_var_y: Option<f64>,
    pub probability: Option<f64>,
    pub n_w: Option<f64>,
    pub min_w: Option<f64>,
    pub alpha_s: Option<f64>,
    pub chi_eff: Option<f64>,
    pub power: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config_sha256: String,
    pub unix_time: u64,
    pub version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<AxisOutput>,
    pub records: Vec<SweepRecord>,
    pub metadata: SweepMetadata,
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepResult {
    /// Deterministic CSV in axis order; metadata is left to the JSON form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let names: Vec<&str> = self.axes.iter().map(|a| a.parameter.as_str()).collect();
        writeln!(
            out,
            "{},stable,max_real,var_x,var_y,cond_var_x,cond_var_y,probability,n_w,min_w,alpha_s,chi_eff,power,error",
            names.join(",")
        )?;
        for r in &self.records {
            let coords: Vec<String> = r.coords.iter().map(|c| format!("{c:.16e}")).collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{:.16e},{}",
                coords.join(","),
                r.stable,
                opt_field(r.max_real),
                opt_field(r.var_x),
                opt_field(r.var_y),
                opt_field(r.cond_var_x),
                opt_field(r.cond_var_y),
                opt_field(r.probability),
                opt_field(r.n_w),
                opt_field(r.min_w),
                opt_field(r.alpha_s),
                opt_field(r.chi_eff),
                r.power,
                csv_escape(r.error.as_deref().unwrap_or(""))
            )?;
        }
        Ok(())
    }

    /// Stable record with the smallest value of `key`.
    pub fn argmin(&self, key: impl Fn(&SweepRecord) -> Option<f64>) -> Option<&SweepRecord> {
        self.records
            .iter()
            .filter(|r| r.stable)
            .filter_map(|r| key(r).map(|v| (r, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(r, _)| r)
    }
}

pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let canonical = serde_json::to_string(cfg)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn metadata(cfg: &RunConfig) -> Result<SweepMetadata> {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(SweepMetadata {
        config_sha256: config_hash(cfg)?,
        unix_time,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SweepMode {
    Full,
    StabilityOnly,
}

fn sweep_point(
    cfg: &RunConfig,
    sweep: &SweepConfig,
    mode: SweepMode,
    base: &PhysicalParams,
    base_chi: Option<f64>,
    coords: Vec<f64>,
) -> SweepRecord {
    let mut params = base.clone();
    let mut chi_eff = base_chi;
    for (axis, &v) in sweep.axes.iter().zip(&coords) {
        apply_parameter(&mut params, &mut chi_eff, axis.parameter, v);
    }
    let mut rec = SweepRecord {
        coords,
        stable: false,
        max_real: None,
        var_x: None,
        var_y: None,
        cond_var_x: None,
        cond_var_y: None,
        probability: None,
        n_w: None,
        min_w: None,
        alpha_s: None,
        chi_eff: None,
        power: params.power,
        error: None,
    };
    let result = (|| -> Result<()> {
        if sweep.optimize_power && chi_eff.is_none() {
            let opt = cfg.optimize_power.as_ref().expect("validated");
            match optimize_power(&params, opt) {
                Ok(o) => params.power = o.power,
                Err(Error::Domain(m)) => {
                    // No admissible power: report the point at the configured power.
                    rec.error = Some(m);
                }
                Err(e) => return Err(e),
            }
            rec.power = params.power;
        }
        let model = build_model(&params, chi_eff)?;
        rec.max_real = Some(model.stability.max_real);
        rec.alpha_s = Some(model.alpha_s);
        rec.chi_eff = Some(model.chi_eff);
        rec.stable = model.is_stable();
        if !rec.stable || mode == SweepMode::StabilityOnly {
            return Ok(());
        }
        let cm = steady_state(&model)?;
        rec.var_x = Some(cm.sigma[(2, 2)]);
        rec.var_y = Some(cm.sigma[(3, 3)]);
        if cfg.conditioning.enabled {
            if sweep.negativity {
                let w = wigner_of(&cm, cfg)?;
                rec.cond_var_x = Some(w.moments.var_x);
                rec.cond_var_y = Some(w.moments.var_y);
                rec.probability = Some(w.field.probability());
                rec.n_w = Some(w.negativity.n_w);
                rec.min_w = Some(w.negativity.min_w);
            } else {
                let c = conditional_summary(&cm, cfg.conditioning.s)?;
                rec.cond_var_x = Some(c.var_x);
                rec.cond_var_y = Some(c.var_y);
                rec.probability = Some(c.probability);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        rec.error = Some(e.to_string());
    }
    rec
}

fn run_grid(cfg: &RunConfig, mode: SweepMode) -> Result<SweepResult> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing sweep block".into()))?;
    let (base, base_chi) = cfg.params.resolve()?;
    let axes: Vec<AxisOutput> = sweep
        .axes
        .iter()
        .map(|a| {
            let values = a.values();
            let f = a.si_factor(base.omega_m);
            AxisOutput {
                parameter: a.parameter.name().to_string(),
                si_values: values.iter().map(|v| v * f).collect(),
                values,
            }
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    // Row-major: the last axis varies fastest.
    let coords_of = |mut k: usize| {
        let mut c = vec![0.0; axes.len()];
        for (d, a) in axes.iter().enumerate().rev() {
            let n = a.si_values.len();
            c[d] = a.si_values[k % n];
            k /= n;
        }
        c
    };
    let records: Vec<SweepRecord> = (0..total)
        .into_par_iter()
        .map(|k| sweep_point(cfg, sweep, mode, &base, base_chi, coords_of(k)))
        .collect();
    Ok(SweepResult {
        axes,
        records,
        metadata: metadata(cfg)?,
    })
}

/// Evaluates every grid point in parallel; unstable points are data.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    run_grid(cfg, SweepMode::Full)
}

/// Like [`run_sweep`] but only the stability verdict and the slowest decay rate.
pub fn stability_map(cfg: &RunConfig) -> Result<SweepResult> {
    run_grid(cfg, SweepMode::StabilityOnly)
}

/// First `x` at which `y` crosses `level`, by linear interpolation between
/// neighbouring samples.
pub fn first_crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    xs.windows(2).zip(ys.windows(2)).find_map(|(x, y)| {
        let (a, b) = (y[0] - level, y[1] - level);
        if a == 0.0 {
            Some(x[0])
        } else if a * b < 0.0 {
            Some(x[0] + (x[1] - x[0]) * a / (a - b))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json(task: &str, extra: &str) -> String {
        format!(
            r#"{{
            "task": "{task}",
            "params": {{
                "omega_m_hz": 1e7, "quality_factor": 1e4, "mass_kg": 2e-16,
                "wavelength_m": 1.54e-6, "power_w": 2.36e-3, "cavity_length_m": 1e-3,
                "kappa_hz": 2e6, "gamma_a_hz": 2e5, "g_n_rad_s": 2e8,
                "delta_c_tilde_omega_m": 0.0, "delta_a_omega_m": -1.0, "temperature_k": 100.0
            }}{extra}
        }}"#
        )
    }

    #[test]
    fn steady_matches_direct_chain() {
        let cfg = RunConfig::from_json(&base_json("steady", "")).unwrap();
        let r = run_steady(&cfg).unwrap();
        let (p, _) = cfg.params.resolve().unwrap();
        let cm = steady_state(&LinearModel::new(&p).unwrap()).unwrap();
        assert_eq!(r.quadratures.var_x, cm.sigma[(2, 2)]);
        assert!(r.conditional.is_none());
    }

    #[test]
    fn crossing_interpolation() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.2, 0.4, 0.6, 0.8];
        assert!((first_crossing(&xs, &ys, 0.5).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(first_crossing(&xs, &ys, 0.9), None);
    }

    #[test]
    fn sweep_shape_and_unstable_records() {
        let extra = r#", "sweep": {"axes": [
            {"parameter": "delta_c_tilde", "min": -1.0, "max": 1.0, "n_points": 3, "unit": "omega_m"},
            {"parameter": "power", "min": 1e-4, "max": 1.0, "n_points": 4, "scale": "log"}
        ]}"#;
        let cfg = RunConfig::from_json(&base_json("sweep", extra)).unwrap();
        let r = run_sweep(&cfg).unwrap();
        assert_eq!(r.records.len(), 12);
        assert_eq!(r.records[5].coords[1], r.axes[1].si_values[1]);
        assert_eq!(r.records[5].coords[0], 0.0);
        for rec in &r.records {
            assert_eq!(rec.var_x.is_some(), rec.stable, "{rec:?}");
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        r.write_csv(&mut a).unwrap();
        run_sweep(&cfg).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_width_power_range() {
        let (p, _) = RunConfig::from_json(&base_json("steady", "")).unwrap().params.resolve().unwrap();
        let opt = OptimizeConfig {
            min_power_w: 1e-3,
            max_power_w: 1e-3,
            quadrature: Quadrature::Y,
            margin: 1e-4,
            n_scan: 16,
        };
        let o = optimize_power(&p, &opt).unwrap();
        assert_eq!(o.power, 1e-3);
        let unreachable = OptimizeConfig { min_power_w: 10.0, max_power_w: 10.0, ..opt };
        assert!(matches!(optimize_power(&p, &unreachable), Err(Error::Domain(_))));
    }
}
