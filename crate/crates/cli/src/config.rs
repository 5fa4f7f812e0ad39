//! Declarative sweep configuration (JSON).

use std::fmt;
use std::path::Path;

use qnl_core::Complex;
use qnl_core::{BackAction, GaugeKernel, NoiseError, PhysConstants, Susceptibility, ThermalModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub probe: ProbeSpec,
    #[serde(default)]
    pub back_action: BackActionSpec,
    #[serde(default)]
    pub thermal: ThermalSpec,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub k_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_ff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SffSweep>,
    /// Real gauge `𝒦′` for `fixed_effective`; `Re K(Ω)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<f64>,
    #[serde(default = "yes")]
    pub allow_sigma: bool,
    #[serde(default)]
    pub sigma_zero: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    DampedOscillator { mass: f64, omega0: f64, damping: f64 },
    FreeMass { mass: f64, damping: f64 },
    Tabulated { omega: Vec<f64>, inv_chi_re: Vec<f64>, inv_chi_im: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackActionSpec {
    Constant { re: f64, im: f64 },
    Tabulated { omega: Vec<f64>, re: Vec<f64>, im: Vec<f64> },
}

impl Default for BackActionSpec {
    fn default() -> Self {
        Self::Constant { re: 0.0, im: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThermalSpec {
    #[default]
    Zero,
    Uniform { temperature: f64 },
    Effective { omega: Vec<f64>, temperature: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Physical `S_FF` fixed, dynamic back action `K` from the config.
    FixedSff,
    /// Effective `S_𝓕𝓕` fixed with a real gauge.
    FixedEffective,
    /// `S_FF` swept at a single frequency.
    SweepSffAtFixedOmega,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SffSweep {
    pub omega: f64,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Interpret start/stop as multiples of the threshold at `omega`.
    #[serde(default)]
    pub relative_to_threshold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}, at `{field}`: {message}")]
    Parse { line: usize, column: usize, field: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid(msg.to_string())
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse { line: inner.line(), column: inner.column(), field, message: inner.to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Canonical serialization; field order is fixed by the struct layout.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Whether the σ = 0 constraint applies.
    pub fn constrained(&self) -> bool {
        self.sigma_zero || !self.allow_sigma
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.susceptibility()?;
        self.back_action_model()?;
        self.thermal_model()?;
        self.constants()?;
        match self.mode {
            Mode::FixedSff | Mode::FixedEffective => {
                let grid = self.grid.as_ref().ok_or_else(|| invalid("`grid` is required for this mode"))?;
                check_range("grid", grid.start, grid.stop, grid.points, grid.spacing)?;
                if grid.start <= 0.0 {
                    return Err(invalid("grid frequencies must be > 0"));
                }
                match self.s_ff {
                    Some(s) if s.is_finite() && s > 0.0 => {}
                    Some(s) => return Err(invalid(format!("s_ff must be finite and > 0, got {s}"))),
                    None => return Err(invalid("`s_ff` is required for this mode")),
                }
            }
            Mode::SweepSffAtFixedOmega => {
                let sweep = self.sweep.as_ref().ok_or_else(|| invalid("`sweep` is required for this mode"))?;
                check_range("sweep", sweep.start, sweep.stop, sweep.points, sweep.spacing)?;
                if sweep.start <= 0.0 {
                    return Err(invalid("s_ff sweep values must be > 0"));
                }
                if !(sweep.omega.is_finite() && sweep.omega > 0.0) {
                    return Err(invalid("sweep omega must be finite and > 0"));
                }
            }
        }
        if let Some(g) = self.gauge {
            if !g.is_finite() {
                return Err(invalid("gauge must be finite"));
            }
        }
        Ok(())
    }

    pub fn susceptibility(&self) -> Result<Susceptibility<f64>, ConfigError> {
        match &self.probe {
            ProbeSpec::DampedOscillator { mass, omega0, damping } => {
                Susceptibility::damped_oscillator(*mass, *omega0, *damping)
            }
            ProbeSpec::FreeMass { mass, damping } => Susceptibility::free_mass(*mass, *damping),
            ProbeSpec::Tabulated { omega, inv_chi_re, inv_chi_im } => {
                if inv_chi_re.len() != inv_chi_im.len() {
                    return Err(invalid("probe inv_chi_re and inv_chi_im differ in length"));
                }
                let values = inv_chi_re.iter().zip(inv_chi_im).map(|(&r, &i)| Complex::new(r, i)).collect();
                Susceptibility::tabulated(omega.clone(), values)
            }
        }
        .map_err(|e| invalid(format!("probe: {e}")))
    }

    pub fn back_action_model(&self) -> Result<BackActionModel, ConfigError> {
        match &self.back_action {
            BackActionSpec::Constant { re, im } => {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(invalid("back_action must be finite"));
                }
                Ok(BackActionModel::Constant(BackAction::new(*re, *im)))
            }
            BackActionSpec::Tabulated { omega, re, im } => {
                if re.len() != im.len() {
                    return Err(invalid("back_action re and im differ in length"));
                }
                let values = re.iter().zip(im).map(|(&r, &i)| Complex::new(r, i)).collect();
                // the tabulated response type doubles as a complex interpolant
                let table = Susceptibility::tabulated(omega.clone(), values)
                    .map_err(|e| invalid(format!("back_action: {e}")))?;
                Ok(BackActionModel::Tabulated(table))
            }
        }
    }

    pub fn thermal_model(&self) -> Result<ThermalModel<f64>, ConfigError> {
        match &self.thermal {
            ThermalSpec::Zero => Ok(ThermalModel::Zero),
            ThermalSpec::Uniform { temperature } => ThermalModel::uniform(*temperature),
            ThermalSpec::Effective { omega, temperature } => {
                ThermalModel::effective_spectrum(omega.clone(), temperature.clone())
            }
        }
        .map_err(|e| invalid(format!("thermal: {e}")))
    }

    pub fn constants(&self) -> Result<PhysConstants<f64>, ConfigError> {
        PhysConstants::new(self.hbar, self.k_b).map_err(|e| invalid(format!("constants: {e}")))
    }

    /// Gauge for the effective mode at a given back action.
    pub fn gauge_at(&self, k: BackAction<f64>) -> GaugeKernel<f64> {
        GaugeKernel::real(self.gauge.unwrap_or(k.0.re))
    }
}

fn check_range(what: &str, start: f64, stop: f64, points: usize, spacing: Spacing) -> Result<(), ConfigError> {
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(invalid(format!("{what}: need finite start < stop, got {start} .. {stop}")));
    }
    if points < 2 {
        return Err(invalid(format!("{what}: need at least 2 points, got {points}")));
    }
    if spacing == Spacing::Log && start <= 0.0 {
        return Err(invalid(format!("{what}: log spacing needs start > 0")));
    }
    Ok(())
}

/// Evenly spaced values, endpoints included. Log grids interpolate the
/// base-10 exponent, so decade points land exactly.
pub fn grid_points(start: f64, stop: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            let t = i as f64 / last;
            match (i, spacing) {
                (0, _) => start,
                (i, _) if i == points - 1 => stop,
                (_, Spacing::Linear) => start + (stop - start) * t,
                (_, Spacing::Log) => {
                    let (a, b) = (start.log10(), stop.log10());
                    10f64.powf(a + (b - a) * t)
                }
            }
        })
        .collect()
}

/// Dynamic back action as a function of frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum BackActionModel {
    Constant(BackAction<f64>),
    Tabulated(Susceptibility<f64>),
}

impl BackActionModel {
    pub fn at(&self, omega: f64) -> Result<BackAction<f64>, NoiseError> {
        match self {
            Self::Constant(k) => Ok(*k),
            Self::Tabulated(table) => table.inv_chi(omega).map(BackAction),
        }
    }
}
