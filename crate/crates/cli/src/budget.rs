//! Frequency (or `S_FF`) sweeps through the optimizer.

use qnl_core::Complex;
use qnl_core::{
    dql, fdt_psd, optimize_fixed_backaction, optimize_fixed_eff_backaction, optimize_fixed_eff_backaction_sigma_zero,
    sql, threshold_full, BackAction, BudgetPoint, NoiseError, OptimumReport, Regime,
};
use rayon::prelude::*;

use crate::config::{grid_points, ConfigError, Mode, SweepConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
#[error("at {variable} = {at}: {error}")]
pub struct PointError {
    pub variable: &'static str,
    pub at: f64,
    pub error: NoiseError,
}

#[derive(Debug, thiserror::Error)]
pub enum BudgetError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Point(#[from] PointError),
    #[error("cannot build thread pool: {0}")]
    Pool(String),
}

/// Variable the table is sorted by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Swept {
    Omega,
    SFf,
}

impl Swept {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Omega => "omega",
            Self::SFf => "s_ff",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "omega" => Some(Self::Omega),
            "s_ff" => Some(Self::SFf),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetRow {
    pub omega: f64,
    pub sql: f64,
    pub dql: f64,
    /// `+∞` for a lossless probe.
    pub s_thr: f64,
    pub s_sum_opt: f64,
    pub regime: Regime,
    pub s_fdt: f64,
    pub s_total: f64,
    pub sigma_opt: f64,
    pub s_xx_opt: f64,
    pub re_s_xf_opt: f64,
    pub im_s_xf_opt: f64,
    /// Only present for `S_FF` sweeps.
    pub s_ff: Option<f64>,
}

impl BudgetRow {
    fn from_point(p: &BudgetPoint<f64>, s_ff: Option<f64>) -> Self {
        Self {
            omega: p.omega,
            sql: p.sql,
            dql: p.dql,
            s_thr: p.s_thr,
            s_sum_opt: p.s_sum_opt,
            regime: p.regime,
            s_fdt: p.s_fdt,
            s_total: p.s_total,
            sigma_opt: p.sigma_opt,
            s_xx_opt: p.optimal_triad.s_xx,
            re_s_xf_opt: p.optimal_triad.s_xf.re,
            im_s_xf_opt: p.optimal_triad.s_xf.im,
            s_ff,
        }
    }

    pub fn swept_value(&self, swept: Swept) -> f64 {
        match swept {
            Swept::Omega => self.omega,
            Swept::SFf => self.s_ff.unwrap_or(f64::NAN),
        }
    }
}

/// Row index where the regime tag differs from the previous row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub index: usize,
    pub at: f64,
    pub from: Regime,
    pub to: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub tool_version: String,
    pub config_hash: String,
    pub swept: Swept,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetTable {
    pub meta: Metadata,
    pub rows: Vec<BudgetRow>,
}

/// Everything computed at one sweep point, including the inputs the
/// verification suite needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    pub omega: f64,
    pub chi_inv: Complex<f64>,
    /// Back action paired with the optimal triad: `K`, or `𝒦′` in the
    /// effective mode.
    pub back_action: BackAction<f64>,
    /// `S_FF` (or `S_𝓕𝓕`) at this point.
    pub s_ff: f64,
    pub optimum: OptimumReport<f64>,
    pub row: BudgetRow,
}

struct Plan {
    swept: Swept,
    points: Vec<(f64, f64)>,
}

fn plan(cfg: &SweepConfig) -> Result<Plan, BudgetError> {
    match cfg.mode {
        Mode::FixedSff | Mode::FixedEffective => {
            let grid = cfg.grid.as_ref().ok_or_else(|| ConfigError::Invalid("`grid` is required".into()))?;
            let s = cfg.s_ff.ok_or_else(|| ConfigError::Invalid("`s_ff` is required".into()))?;
            let points = grid_points(grid.start, grid.stop, grid.points, grid.spacing).into_iter().map(|w| (w, s)).collect();
            Ok(Plan { swept: Swept::Omega, points })
        }
        Mode::SweepSffAtFixedOmega => {
            let sw = cfg.sweep.as_ref().ok_or_else(|| ConfigError::Invalid("`sweep` is required".into()))?;
            let scale = if sw.relative_to_threshold {
                let at = |source| PointError { variable: "omega", at: sw.omega, error: source };
                let chi_inv = cfg.susceptibility()?.inv_chi(sw.omega).map_err(at)?;
                let k = cfg.back_action_model()?.at(sw.omega).map_err(at)?;
                let thr = threshold_full(chi_inv, k, cfg.hbar).map_err(at)?;
                if !thr.is_finite() {
                    return Err(at(NoiseError::LosslessProbe).into());
                }
                thr
            } else {
                1.0
            };
            let points = grid_points(sw.start, sw.stop, sw.points, sw.spacing)
                .into_iter()
                .map(|s| (sw.omega, s * scale))
                .collect();
            Ok(Plan { swept: Swept::SFf, points })
        }
    }
}

fn evaluate(cfg: &SweepConfig, swept: Swept, omega: f64, s: f64) -> Result<PointEval, PointError> {
    let at = |source| match swept {
        Swept::Omega => PointError { variable: "omega", at: omega, error: source },
        Swept::SFf => PointError { variable: "s_ff", at: s, error: source },
    };
    // the models were validated up front
    let model = cfg.susceptibility().expect("validated probe");
    let thermal = cfg.thermal_model().expect("validated thermal model");
    let consts = cfg.constants().expect("validated constants");
    let k = cfg.back_action_model().expect("validated back action").at(omega).map_err(at)?;
    let hbar = consts.hbar;

    let chi_inv = model.inv_chi(omega).map_err(at)?;
    let sql_v = sql(&model, hbar, omega).map_err(at)?;
    let dql_v = dql(&model, hbar, omega).map_err(at)?;
    let s_fdt = fdt_psd(&model, &thermal, &consts, omega).map_err(at)?;
    let allow_sigma = !cfg.constrained();
    let optimum = match cfg.mode {
        Mode::FixedSff | Mode::SweepSffAtFixedOmega => optimize_fixed_backaction(chi_inv, k, s, allow_sigma, hbar),
        Mode::FixedEffective => {
            let g = cfg.gauge_at(k);
            if allow_sigma {
                optimize_fixed_eff_backaction(chi_inv, &g, s, hbar)
            } else {
                optimize_fixed_eff_backaction_sigma_zero(chi_inv, &g, s, hbar)
            }
        }
    }
    .map_err(at)?;

    let point = BudgetPoint::new(omega, sql_v, dql_v, s_fdt, &optimum);
    let s_col = (swept == Swept::SFf).then_some(s);
    Ok(PointEval {
        omega,
        chi_inv,
        back_action: optimum.triad_back_action,
        s_ff: s,
        optimum,
        row: BudgetRow::from_point(&point, s_col),
    })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, BudgetError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs.filter(|&n| n > 0) {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| BudgetError::Pool(e.to_string()))
}

/// Evaluates every sweep point in parallel; results keep the sweep order and
/// the first failing point (in that order) is reported.
pub fn evaluate_points(cfg: &SweepConfig, jobs: Option<usize>) -> Result<(Swept, Vec<PointEval>), BudgetError> {
    cfg.validate()?;
    let plan = plan(cfg)?;
    let swept = plan.swept;
    log::info!("evaluating {} points over {}", plan.points.len(), swept.as_str());
    let results: Vec<Result<PointEval, PointError>> =
        pool(jobs)?.install(|| plan.points.par_iter().map(|&(w, s)| evaluate(cfg, swept, w, s)).collect());
    let evals = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((swept, evals))
}

pub fn transitions(rows: &[BudgetRow], swept: Swept) -> Vec<Transition> {
    rows.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].regime != w[1].regime)
        .map(|(i, w)| Transition { index: i + 1, at: w[1].swept_value(swept), from: w[0].regime, to: w[1].regime })
        .collect()
}

pub fn run_budget(cfg: &SweepConfig, jobs: Option<usize>) -> Result<BudgetTable, BudgetError> {
    let (swept, evals) = evaluate_points(cfg, jobs)?;
    Ok(assemble(cfg, swept, &evals))
}

pub fn assemble(cfg: &SweepConfig, swept: Swept, evals: &[PointEval]) -> BudgetTable {
    let rows: Vec<BudgetRow> = evals.iter().map(|e| e.row).collect();
    let transitions = transitions(&rows, swept);
    for t in &transitions {
        log::info!("regime {} -> {} at {} = {}", t.from.as_str(), t.to.as_str(), swept.as_str(), t.at);
    }
    BudgetTable {
        meta: Metadata {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: cfg.hash(),
            swept,
            transitions,
        },
        rows,
    }
}
