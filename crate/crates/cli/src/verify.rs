//! Invariant checks at configuration scale.

use std::fmt::Write as _;
use std::path::Path;

use qnl_core::Complex;
use qnl_core::oracle::{brute_force_min, OracleConfig};
use qnl_core::{
    commutator_check, gauge_transform, phase_transition_probe, sigma, sum_noise_psd, threshold_full,
    uncertainty_slack, GaugeKernel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget::{assemble, evaluate_points, BudgetError, BudgetTable, PointEval};
use crate::config::SweepConfig;
use crate::output::{budget_from_csv, budget_from_json, budget_row_cells, BUDGET_COLUMNS};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn measured(name: &'static str, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name, residual, tolerance, passed: residual <= tolerance, detail: detail.into() }
    }

    fn skipped(name: &'static str, why: impl Into<String>) -> Self {
        Self { name, residual: 0.0, tolerance: 0.0, passed: true, detail: format!("skipped: {}", why.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag} {:<20} residual={:.3e} tol={:.1e} {}", c.name, c.residual, c.tolerance, c.detail);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub oracle_points: usize,
    pub gauge_draws: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, oracle_points: 5, gauge_draws: 50 }
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

fn gauge_check(evals: &[PointEval], hbar: f64, rng: &mut ChaCha8Rng, draws: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let e = &evals[rng.gen_range(0..evals.len())];
        let k = e.back_action;
        let t = e.optimum.optimal_triad;
        let scale_k = k.0.norm().max(e.chi_inv.norm()).max(1.0);
        let g = GaugeKernel::new(Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * scale_k);
        let m = gauge_transform(&t, k, &g);

        let kk = e.chi_inv + k.0;
        let sum_scale = kk.norm_sqr() * t.s_xx + 2.0 * kk.norm() * t.s_xf.norm() + t.s_ff;
        let a = sum_noise_psd(&t, e.chi_inv, k);
        let b = sum_noise_psd(&m.triad, e.chi_inv, m.back_action);
        worst = worst.max(rel(a, b, sum_scale));

        let d = k.0 - g.value();
        let t2 = m.triad;
        let slack_scale = t.s_xx * t.s_ff
            + t.s_xf.norm_sqr()
            + t2.s_xx * t2.s_ff
            + t2.s_xf.norm_sqr()
            + d.norm_sqr() * t.s_xx * t.s_xx
            + hbar * hbar;
        let sa = uncertainty_slack(&t, k, hbar);
        let sb = uncertainty_slack(&t2, m.back_action, hbar);
        worst = worst.max(rel(sa, sb, slack_scale));

        let sig_scale = k.0.im.abs() * t.s_xx + t.s_xf.norm() + d.norm() * t.s_xx;
        worst = worst.max(rel(sigma(&t, k), sigma(&t2, m.back_action), sig_scale));
    }
    Check::measured("gauge_invariance", worst, 1e-12, format!("{draws} random gauges"))
}

fn oracle_check(cfg: &SweepConfig, evals: &[PointEval], rng: &mut ChaCha8Rng, n: usize) -> Check {
    if cfg.constrained() {
        return Check::skipped("oracle_agreement", "the brute-force search does not impose σ = 0");
    }
    let mut idx: Vec<usize> = (0..evals.len()).collect();
    // partial Fisher-Yates: first n entries become a uniform sample
    let n = n.min(idx.len());
    for i in 0..n {
        let j = rng.gen_range(i..idx.len());
        idx.swap(i, j);
    }
    let mut worst = 0.0f64;
    let mut worst_at = f64::NAN;
    for &i in &idx[..n] {
        let e = &evals[i];
        match brute_force_min(e.chi_inv, e.back_action, e.s_ff, &OracleConfig::default(), cfg.hbar) {
            Ok(r) => {
                let d = rel(r.s_sum_min, e.optimum.s_sum, e.optimum.s_sum.abs());
                if d > worst {
                    worst = d;
                    worst_at = e.omega;
                }
            }
            Err(err) => {
                return Check::measured("oracle_agreement", f64::INFINITY, 1e-3, format!("oracle failed at omega = {}: {err}", e.omega))
            }
        }
    }
    Check::measured("oracle_agreement", worst, 1e-3, format!("{n} points, worst at omega = {worst_at}"))
}

fn commutator_residuals(evals: &[PointEval], hbar: f64) -> Check {
    let mut worst = 0.0f64;
    for e in evals {
        let b = commutator_check(e.chi_inv, e.back_action, hbar);
        worst = worst.max(b.residual.abs() / b.c_sum.abs().max(1.0));
    }
    Check::measured("commutator_residual", worst, 1e-14, format!("{} points", evals.len()))
}

fn phase_check(evals: &[PointEval], hbar: f64) -> Check {
    let Some(e) = evals.iter().find(|e| e.chi_inv.im != 0.0) else {
        return Check::skipped("phase_transition", "no lossy grid point");
    };
    let k = e.back_action;
    let Ok(thr) = threshold_full(e.chi_inv, k, hbar) else {
        return Check::skipped("phase_transition", "no finite threshold");
    };
    let dql = hbar * e.chi_inv.im.abs();
    match phase_transition_probe(e.chi_inv, k, hbar, 1e-4 * thr, true) {
        Ok(p) => {
            let flat = p.d2_above.abs() * thr * thr / dql;
            let kink = (p.d1_below - p.d1_above).abs() * thr / dql;
            Check::measured(
                "phase_transition",
                flat.max(kink),
                1e-6,
                format!("omega = {}, d2 below/above = {:.6e}/{:.1e}", e.omega, p.d2_below, p.d2_above),
            )
        }
        Err(err) => Check::skipped("phase_transition", format!("omega = {}: {err}", e.omega)),
    }
}

fn row_consistency(table: &BudgetTable) -> Check {
    let worst = table
        .rows
        .iter()
        .map(|r| rel(r.s_total, r.s_sum_opt + r.s_fdt, r.s_total.abs()))
        .fold(0.0, f64::max);
    Check::measured("row_consistency", worst, 0.0, "s_total = s_sum_opt + s_fdt")
}

/// Compares against a golden budget file (CSV, or JSON by extension) and
/// reports the first differing row.
pub fn golden_check(table: &BudgetTable, path: &Path) -> Check {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Check::measured("golden", f64::INFINITY, 0.0, format!("cannot read {}: {e}", path.display())),
    };
    let parsed = if path.extension().is_some_and(|x| x == "json") { budget_from_json(&text) } else { budget_from_csv(&text) };
    let golden = match parsed {
        Ok(g) => g,
        Err(e) => return Check::measured("golden", f64::INFINITY, 0.0, format!("cannot parse {}: {e}", path.display())),
    };
    let mut columns: Vec<&str> = BUDGET_COLUMNS.to_vec();
    columns.push("s_ff");
    for (i, (g, r)) in golden.rows.iter().zip(&table.rows).enumerate() {
        let (gc, rc) = (budget_row_cells(g), budget_row_cells(r));
        if let Some(col) = (0..gc.len().max(rc.len())).find(|&c| gc.get(c) != rc.get(c)) {
            let show = |v: Option<&String>| v.cloned().unwrap_or_else(|| "-".into());
            return Check::measured(
                "golden",
                1.0,
                0.0,
                format!(
                    "first differing row {i} (omega = {}), column {}: golden {} vs computed {}",
                    r.omega,
                    columns[col],
                    show(gc.get(col)),
                    show(rc.get(col))
                ),
            );
        }
    }
    if golden.rows.len() != table.rows.len() {
        let first = golden.rows.len().min(table.rows.len());
        return Check::measured(
            "golden",
            1.0,
            0.0,
            format!("first differing row {first}: golden has {} rows, computed {}", golden.rows.len(), table.rows.len()),
        );
    }
    Check::measured("golden", 0.0, 0.0, format!("{} rows identical", table.rows.len()))
}

pub fn verify(
    cfg: &SweepConfig,
    opts: &VerifyOptions,
    golden: Option<&Path>,
    jobs: Option<usize>,
) -> Result<VerifyReport, BudgetError> {
    let (swept, evals) = evaluate_points(cfg, jobs)?;
    let table = assemble(cfg, swept, &evals);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let hbar = cfg.hbar;
    let mut checks = vec![
        row_consistency(&table),
        gauge_check(&evals, hbar, &mut rng, opts.gauge_draws),
        oracle_check(cfg, &evals, &mut rng, opts.oracle_points),
        commutator_residuals(&evals, hbar),
        phase_check(&evals, hbar),
    ];
    if let Some(path) = golden {
        checks.push(golden_check(&table, path));
    }
    for c in &checks {
        log::debug!("{} {} {:e}", c.name, c.passed, c.residual);
    }
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_rendering() {
        let r = VerifyReport {
            checks: vec![Check::measured("a", 1e-16, 1e-14, "ok"), Check::measured("b", 1.0, 0.0, "bad")],
        };
        assert!(!r.passed());
        let text = r.render();
        assert!(text.starts_with("PASS a"));
        assert!(text.lines().nth(1).unwrap().starts_with("FAIL b"));
    }

    #[test]
    fn gauge_check_on_lossy_instance() {
        let cfg = SweepConfig::from_json(
            r#"{
                "probe": {"type": "damped_oscillator", "mass": 1, "omega0": 1, "damping": 0.2},
                "back_action": {"type": "constant", "re": 0.1, "im": 0.05},
                "grid": {"start": 0.5, "stop": 1.5, "points": 21},
                "mode": "fixed_sff",
                "s_ff": 0.3
            }"#,
        )
        .unwrap();
        let (_, evals) = evaluate_points(&cfg, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(gauge_check(&evals, 1.0, &mut rng, 200).passed);
        assert!(commutator_residuals(&evals, 1.0).passed);
        assert!(phase_check(&evals, 1.0).passed);
    }
}
