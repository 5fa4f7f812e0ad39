//! Sum-noise series against the effective back-action PSD at one frequency,
//! comparing the full optimum, the σ = 0 optimum and the matched spin meter.
//! Dynamic back action and gauge are both zero here.

use qnl_core::{spin_figure_point, threshold_eff, GaugeKernel, NoiseError};
use serde::Serialize;

use crate::budget::{BudgetError, PointError, TOOL_VERSION};
use crate::config::{grid_points, ConfigError, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureRow {
    pub s_ff: f64,
    pub full: f64,
    pub sigma_zero: f64,
    pub spin_matched: f64,
    pub dql: f64,
    pub s_thr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureTable {
    #[serde(rename = "version")]
    pub tool_version: String,
    #[serde(rename = "config_sha256")]
    pub config_hash: String,
    pub omega: f64,
    pub s_thr0: f64,
    pub dql: f64,
    pub rows: Vec<FigureRow>,
}

/// Uses the `sweep` section of the config; `relative_to_threshold` scales
/// the sweep by the threshold at zero back action.
pub fn spin_figure(cfg: &SweepConfig) -> Result<FigureTable, BudgetError> {
    cfg.validate()?;
    let sw = cfg.sweep.as_ref().ok_or_else(|| ConfigError::Invalid("spin-figure needs a `sweep` section".into()))?;
    let hbar = cfg.hbar;
    let at_omega = |error| PointError { variable: "omega", at: sw.omega, error };
    let chi_inv = cfg.susceptibility()?.inv_chi(sw.omega).map_err(at_omega)?;
    let gauge = GaugeKernel::real(0.0);
    let s_thr0 = threshold_eff(chi_inv, &gauge, hbar).map_err(at_omega)?;
    if !s_thr0.is_finite() {
        return Err(at_omega(NoiseError::LosslessProbe).into());
    }
    let dql = hbar * chi_inv.im.abs();
    let scale = if sw.relative_to_threshold { s_thr0 } else { 1.0 };

    let rows = grid_points(sw.start, sw.stop, sw.points, sw.spacing)
        .into_iter()
        .map(|x| {
            let s = x * scale;
            let p = spin_figure_point(chi_inv, s, hbar).map_err(|error| PointError { variable: "s_ff", at: s, error })?;
            Ok(FigureRow {
                s_ff: s,
                full: p.full,
                sigma_zero: p.sigma_zero,
                spin_matched: p.spin_matched,
                dql,
                s_thr: s_thr0,
            })
        })
        .collect::<Result<Vec<_>, PointError>>()?;

    Ok(FigureTable {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: cfg.hash(),
        omega: sw.omega,
        s_thr0,
        dql,
        rows,
    })
}
