//! JSON run configurations.
//!
//! Every rate carries its unit in the key: `<name>_rad_s` for angular
//! frequencies, `<name>_hz` for cyclic frequencies (multiplied by 2π on
//! load), and for detunings also `<name>_omega_m` in units of the mechanical
//! frequency. Exactly one form per quantity must be given.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::NoiseModel;
use crate::model::{atom_cavity_coupling, PhysicalParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Steady,
    Sweep,
    Wigner,
    Spectrum,
    StabilityMap,
    OptimizePower,
}

/// Atom-number route to `g_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomsConfig {
    /// Transition dipole moment (C·m).
    pub dipole_cm: f64,
    pub mode_volume_m3: f64,
    pub count: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m_hz: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m_hz: Option<f64>,
    /// `ω_m/γ_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_factor: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_l_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity_length_m: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_hz: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_a_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_a_hz: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_n_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_n_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<AtomsConfig>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c_tilde_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c_tilde_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c_tilde_omega_m: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a_omega_m: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,

    /// Prescribed effective optomechanical coupling; overrides the power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_eff_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_eff_hz: Option<f64>,
}

/// Picks the single given form of a quantity and converts it to SI.
fn one_of(name: &str, forms: &[(&str, Option<f64>, f64)]) -> Result<Option<f64>> {
    let given: Vec<_> = forms.iter().filter(|f| f.1.is_some()).collect();
    match given.len() {
        0 => Ok(None),
        1 => {
            let (key, v, factor) = given[0];
            let v = v.unwrap();
            if !v.is_finite() {
                return Err(Error::Config(format!("params.{key} must be finite")));
            }
            Ok(Some(v * factor))
        }
        _ => {
            let keys: Vec<_> = given.iter().map(|f| format!("params.{}", f.0)).collect();
            Err(Error::Config(format!("{name} given more than once: {}", keys.join(", "))))
        }
    }
}

fn required(name: &str, forms: &[(&str, Option<f64>, f64)]) -> Result<f64> {
    one_of(name, forms)?.ok_or_else(|| {
        let keys: Vec<_> = forms.iter().map(|f| format!("params.{}", f.0)).collect();
        Error::Config(format!("missing {name}: expected one of {}", keys.join(", ")))
    })
}

impl ParamsConfig {
    /// Physical parameters in SI units, plus the prescribed `χ_eff` if any.
    pub fn resolve(&self) -> Result<(PhysicalParams, Option<f64>)> {
        let tau = 2.0 * PI;
        let omega_m = required("omega_m", &[("omega_m_rad_s", self.omega_m_rad_s, 1.0), ("omega_m_hz", self.omega_m_hz, tau)])?;
        let gamma_m = required(
            "gamma_m",
            &[
                ("gamma_m_rad_s", self.gamma_m_rad_s, 1.0),
                ("gamma_m_hz", self.gamma_m_hz, tau),
                ("quality_factor", self.quality_factor.map(|q| 1.0 / q), omega_m),
            ],
        )?;
        let mass = required("mass", &[("mass_kg", self.mass_kg, 1.0)])?;
        let omega_l = match (self.omega_l_rad_s, self.wavelength_m) {
            (Some(w), None) => w,
            (None, Some(l)) => PhysicalParams::omega_from_wavelength(l),
            (Some(_), Some(_)) => {
                return Err(Error::Config("laser frequency given more than once: params.omega_l_rad_s, params.wavelength_m".into()))
            }
            (None, None) => return Err(Error::Config("missing laser frequency: expected params.omega_l_rad_s or params.wavelength_m".into())),
        };
        let power = required("power", &[("power_w", self.power_w, 1.0)])?;
        let cavity_length = required("cavity_length", &[("cavity_length_m", self.cavity_length_m, 1.0)])?;
        let kappa = required("kappa", &[("kappa_rad_s", self.kappa_rad_s, 1.0), ("kappa_hz", self.kappa_hz, tau)])?;
        let gamma_a = required("gamma_a", &[("gamma_a_rad_s", self.gamma_a_rad_s, 1.0), ("gamma_a_hz", self.gamma_a_hz, tau)])?;
        let direct = one_of("g_n", &[("g_n_rad_s", self.g_n_rad_s, 1.0), ("g_n_hz", self.g_n_hz, tau)])?;
        let g_n = match (direct, &self.atoms) {
            (Some(g), None) => g,
            (None, Some(a)) => atom_cavity_coupling(a.dipole_cm, a.mode_volume_m3, a.count, omega_l)
                .map_err(|e| Error::Config(format!("params.atoms: {e}")))?,
            (Some(_), Some(_)) => return Err(Error::Config("g_n given both directly and through params.atoms".into())),
            (None, None) => {
                return Err(Error::Config("missing g_n: expected params.g_n_rad_s, params.g_n_hz or params.atoms".into()))
            }
        };
        let delta_c_tilde = required(
            "delta_c_tilde",
            &[
                ("delta_c_tilde_rad_s", self.delta_c_tilde_rad_s, 1.0),
                ("delta_c_tilde_hz", self.delta_c_tilde_hz, tau),
                ("delta_c_tilde_omega_m", self.delta_c_tilde_omega_m, omega_m),
            ],
        )?;
        let delta_a = required(
            "delta_a",
            &[
                ("delta_a_rad_s", self.delta_a_rad_s, 1.0),
                ("delta_a_hz", self.delta_a_hz, tau),
                ("delta_a_omega_m", self.delta_a_omega_m, omega_m),
            ],
        )?;
        let temperature = required("temperature", &[("temperature_k", self.temperature_k, 1.0)])?;
        let chi_eff = one_of("chi_eff", &[("chi_eff_rad_s", self.chi_eff_rad_s, 1.0), ("chi_eff_hz", self.chi_eff_hz, tau)])?;
        let params = PhysicalParams {
            omega_m,
            gamma_m,
            mass,
            omega_l,
            power,
            cavity_length,
            kappa,
            gamma_a,
            g_n,
            delta_c_tilde,
            delta_a,
            temperature,
        };
        params.validate().map_err(|e| Error::Config(format!("params: {e}")))?;
        if let Some(c) = chi_eff {
            if c < 0.0 {
                return Err(Error::Config(format!("params.chi_eff must be >= 0, got {c}")));
            }
        }
        Ok((params, chi_eff))
    }
}

/// Parameters a sweep axis may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    OmegaM,
    GammaM,
    Mass,
    Power,
    CavityLength,
    Kappa,
    GammaA,
    GN,
    DeltaCTilde,
    DeltaA,
    Temperature,
    ChiEff,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::OmegaM => "omega_m",
            SweepParameter::GammaM => "gamma_m",
            SweepParameter::Mass => "mass",
            SweepParameter::Power => "power",
            SweepParameter::CavityLength => "cavity_length",
            SweepParameter::Kappa => "kappa",
            SweepParameter::GammaA => "gamma_a",
            SweepParameter::GN => "g_n",
            SweepParameter::DeltaCTilde => "delta_c_tilde",
            SweepParameter::DeltaA => "delta_a",
            SweepParameter::Temperature => "temperature",
            SweepParameter::ChiEff => "chi_eff",
        }
    }

    fn is_rate(self) -> bool {
        !matches!(
            self,
            SweepParameter::Mass | SweepParameter::Power | SweepParameter::CavityLength | SweepParameter::Temperature
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

/// Unit of the `min`/`max` values of an axis. `si` means rad/s for rates and
/// the plain SI unit (kg, W, m, K) otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisUnit {
    #[default]
    Si,
    RadS,
    Hz,
    OmegaM,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub scale: AxisScale,
    #[serde(default)]
    pub unit: AxisUnit,
}

impl SweepAxis {
    /// Axis values in the unit of the configuration.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                match self.scale {
                    AxisScale::Linear => self.min + (self.max - self.min) * t,
                    AxisScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }

    /// Factor converting axis values to SI.
    pub fn si_factor(&self, omega_m: f64) -> f64 {
        match self.unit {
            AxisUnit::Si | AxisUnit::RadS => 1.0,
            AxisUnit::Hz => 2.0 * PI,
            AxisUnit::OmegaM => omega_m,
        }
    }

    fn validate(&self, i: usize) -> Result<()> {
        let at = format!("sweep.axes[{i}]");
        if self.n_points < 2 {
            return Err(Error::Config(format!("{at}.n_points must be >= 2, got {}", self.n_points)));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Config(format!("{at}: min and max must be finite")));
        }
        if self.scale == AxisScale::Log && !(self.min > 0.0 && self.max > 0.0) {
            return Err(Error::Config(format!("{at}: log scale needs min, max > 0")));
        }
        if !self.parameter.is_rate() && self.unit != AxisUnit::Si {
            return Err(Error::Config(format!(
                "{at}: {} is not a rate; unit must be \"si\"",
                self.parameter.name()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
    /// Optimize the pump power at every point (uses the `optimize_power` block).
    #[serde(default)]
    pub optimize_power: bool,
    /// Compute Wigner grids and negativity at every point (conditioning on).
    #[serde(default)]
    pub negativity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditioningConfig {
    pub enabled: bool,
    #[serde(default = "default_s")]
    pub s: usize,
}

fn default_s() -> usize {
    1
}

impl Default for ConditioningConfig {
    fn default() -> Self {
        ConditioningConfig { enabled: false, s: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to six standard deviations of the broadest quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub n_points: usize,
}

fn default_grid_points() -> usize {
    crate::conditional::DEFAULT_GRID_POINTS
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_width: None,
            n_points: default_grid_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_spectrum_points")]
    pub n_points: usize,
    /// Axis limits in units of `ω_m`.
    #[serde(default = "default_spectrum_min")]
    pub min_omega_m: f64,
    #[serde(default = "default_spectrum_max")]
    pub max_omega_m: f64,
}

fn default_spectrum_points() -> usize {
    crate::spectra::DEFAULT_SPECTRUM_POINTS
}
fn default_spectrum_min() -> f64 {
    -5.0
}
fn default_spectrum_max() -> f64 {
    5.0
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            n_points: default_spectrum_points(),
            min_omega_m: default_spectrum_min(),
            max_omega_m: default_spectrum_max(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    X,
    #[default]
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub min_power_w: f64,
    pub max_power_w: f64,
    #[serde(default)]
    pub quadrature: Quadrature,
    /// Required decay margin `max Re(eig K) < −margin·ω_m`.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Points of the initial logarithmic scan.
    #[serde(default = "default_scan")]
    pub n_scan: usize,
}

fn default_margin() -> f64 {
    1e-4
}
fn default_scan() -> usize {
    64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub task: Task,
    pub params: ParamsConfig,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub conditioning: ConditioningConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize_power: Option<OptimizeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks cross-field requirements that the schema alone cannot express.
    pub fn validate(&self) -> Result<()> {
        self.params.resolve()?;
        if self.conditioning.enabled && self.conditioning.s > 10 {
            return Err(Error::Config(format!("conditioning.s must be <= 10, got {}", self.conditioning.s)));
        }
        if self.grid.n_points < 3 || self.grid.n_points % 2 == 0 {
            return Err(Error::Config(format!("grid.n_points must be odd and >= 3, got {}", self.grid.n_points)));
        }
        if let Some(h) = self.grid.half_width {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("grid.half_width must be > 0, got {h}")));
            }
        }
        if let Some(sp) = &self.spectrum {
            if sp.n_points < 2 || !(sp.max_omega_m > sp.min_omega_m) {
                return Err(Error::Config("spectrum needs n_points >= 2 and max_omega_m > min_omega_m".into()));
            }
        }
        if let Some(o) = &self.optimize_power {
            if !(o.min_power_w > 0.0 && o.max_power_w >= o.min_power_w && o.max_power_w.is_finite()) {
                return Err(Error::Config(
                    "optimize_power needs 0 < min_power_w <= max_power_w".into(),
                ));
            }
            if !(o.margin >= 0.0) || o.n_scan < 2 {
                return Err(Error::Config("optimize_power needs margin >= 0 and n_scan >= 2".into()));
            }
        }
        match self.task {
            Task::Sweep | Task::StabilityMap => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("task {:?} requires a sweep block", self.task)))?;
                if sweep.axes.is_empty() {
                    return Err(Error::Config("sweep.axes must not be empty".into()));
                }
                for (i, a) in sweep.axes.iter().enumerate() {
                    a.validate(i)?;
                }
                if sweep.optimize_power && self.optimize_power.is_none() {
                    return Err(Error::Config("sweep.optimize_power requires an optimize_power block".into()));
                }
                if sweep.negativity && !self.conditioning.enabled {
                    return Err(Error::Config("sweep.negativity requires conditioning.enabled".into()));
                }
            }
            Task::OptimizePower => {
                if self.optimize_power.is_none() {
                    return Err(Error::Config("task optimize_power requires an optimize_power block".into()));
                }
            }
            Task::Steady | Task::Wigner | Task::Spectrum => {}
        }
        Ok(())
    }
}

/// Sets one physical parameter (or the prescribed `χ_eff`) to an SI value.
pub fn apply_parameter(params: &mut PhysicalParams, chi_eff: &mut Option<f64>, p: SweepParameter, value: f64) {
    match p {
        SweepParameter::OmegaM => params.omega_m = value,
        SweepParameter::GammaM => params.gamma_m = value,
        SweepParameter::Mass => params.mass = value,
        SweepParameter::Power => params.power = value,
        SweepParameter::CavityLength => params.cavity_length = value,
        SweepParameter::Kappa => params.kappa = value,
        SweepParameter::GammaA => params.gamma_a = value,
        SweepParameter::GN => params.g_n = value,
        SweepParameter::DeltaCTilde => params.delta_c_tilde = value,
        SweepParameter::DeltaA => params.delta_a = value,
        SweepParameter::Temperature => params.temperature = value,
        SweepParameter::ChiEff => *chi_eff = Some(value),
    }
}
