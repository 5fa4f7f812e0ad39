//! Brute-force minimization of the sum noise over all physical meter triads,
//! used to check the closed forms in [`crate::optimizer`].
//!
//! Nothing here uses the closed-form optima or thresholds. The feasible set
//! `{(S_xx, S_xF) : slack ≥ 0}` at fixed `S_FF` is scanned on a grid and the
//! best point is refined with Nelder–Mead on the saturation surface.
//!
//! Restricting the refinement to the saturation surface is exact: at fixed
//! `S_xF` the sum noise grows with `S_xx` (coefficient `|χ_K⁻¹|² > 0`) and
//! the slack is non-decreasing in `S_xx` when `S_FF ≥ ħ|Im K|`, so the best
//! `S_xx` is the smallest feasible one.
//!
//! Works in `f64` only.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{NoiseError, Result};
use crate::meter::{sum_noise_psd, uncertainty_slack, BackAction, NoiseTriad};

/// How the feasible set is scanned before refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Full 3-D grid over `(S_xx, Re S_xF, Im S_xF)` with an explicit
    /// feasibility test.
    FullGrid,
    /// 2-D grid over `S_xF` with `S_xx` eliminated through saturation.
    Surface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Grid points per axis, at least 32.
    pub coarse_grid_points: usize,
    /// Nelder–Mead restarts; zero disables refinement.
    pub refine_iterations: usize,
    pub rel_tolerance: f64,
    /// Multiplier on the dimensional scales that size the search box.
    pub box_scale: f64,
    pub mode: OracleMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            coarse_grid_points: 32,
            refine_iterations: 12,
            rel_tolerance: 1e-4,
            box_scale: 8.0,
            mode: OracleMode::FullGrid,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub s_sum_min: f64,
    pub argmin_triad: NoiseTriad<f64>,
    /// Nelder–Mead iterations summed over restarts.
    pub iterations: usize,
    /// Fraction of coarse grid points that were feasible.
    pub feasible_fraction: f64,
}

/// Smallest `S_xx` making the triad saturate the uncertainty relation for
/// the given `S_xF`. Both signs of σ are tried.
pub fn min_feasible_sxx(s_xf: Complex<f64>, k: BackAction<f64>, s_ff: f64, hbar: f64) -> Option<f64> {
    let (p, q) = (s_xf.re, s_xf.im);
    let ki = k.0.im;
    let base = p * p + q * q + hbar * hbar / 4.0;
    let scale = base + hbar * q.abs() + 1e-300;
    let mut best: Option<f64> = None;
    // σ ≥ 0 branch, then σ < 0 branch
    for (num, den) in [(base - hbar * q, s_ff - hbar * ki), (base + hbar * q, s_ff + hbar * ki)] {
        if den <= 0.0 {
            continue;
        }
        let mut s = (num / den).max(0.0);
        let mut slack = uncertainty_slack(&NoiseTriad::new(s, s_xf, s_ff), k, hbar);
        if slack < 0.0 && slack >= -1e-12 * scale {
            // rounding only: slack is linear in S_xx with slope `den` on this branch
            for _ in 0..3 {
                s -= 2.0 * slack / den;
                slack = uncertainty_slack(&NoiseTriad::new(s, s_xf, s_ff), k, hbar);
                if slack >= 0.0 {
                    break;
                }
            }
        }
        if slack >= 0.0 && best.map_or(true, |b| s < b) {
            best = Some(s);
        }
    }
    best
}

fn require_meter_fdt(k: BackAction<f64>, s_ff: f64, hbar: f64) -> Result<()> {
    if !(s_ff.is_finite() && s_ff > 0.0) {
        return Err(NoiseError::Domain(format!("back-action PSD must be finite and > 0, got {s_ff}")));
    }
    let bound = hbar * k.0.im.abs();
    if s_ff < bound {
        return Err(NoiseError::FdtViolation { s_ff, bound });
    }
    Ok(())
}

struct Problem {
    chi_inv: Complex<f64>,
    k: BackAction<f64>,
    s_ff: f64,
    hbar: f64,
}

impl Problem {
    fn surface_value(&self, x: &[f64]) -> f64 {
        let s_xf = Complex::new(x[0], x[1]);
        match min_feasible_sxx(s_xf, self.k, self.s_ff, self.hbar) {
            Some(s_xx) => sum_noise_psd(&NoiseTriad::new(s_xx, s_xf, self.s_ff), self.chi_inv, self.k),
            None => f64::INFINITY,
        }
    }
}

/// Brute-force minimum of the sum noise at fixed `(χ⁻¹, K, S_FF)`.
///
/// The box is sized from `ħ²/(S_FF − ħ|Im K|)` and `S_FF/|χ_K⁻¹|²` (and
/// `ħ`, `S_FF/|χ_K⁻¹|` for the cross spectrum), then grown until the argmin
/// is well inside it.
pub fn brute_force_min(
    chi_inv: Complex<f64>,
    k: BackAction<f64>,
    s_ff: f64,
    cfg: &OracleConfig,
    hbar: f64,
) -> Result<OracleResult> {
    require_meter_fdt(k, s_ff, hbar)?;
    if cfg.coarse_grid_points < 32 {
        return Err(NoiseError::Domain("oracle grid needs at least 32 points per axis".into()));
    }
    if !(cfg.rel_tolerance > 0.0) {
        return Err(NoiseError::Domain("oracle tolerance must be > 0".into()));
    }
    let problem = Problem { chi_inv, k, s_ff, hbar };
    let inv_k = (chi_inv + k.0).norm().max(1e-300);
    let margin = (s_ff - hbar * k.0.im.abs()).max(1e-3 * s_ff);
    let mut sxx_max = cfg.box_scale * (hbar * hbar / margin + s_ff / (inv_k * inv_k));
    let mut xf_max = cfg.box_scale * (hbar + s_ff / inv_k);

    let mut last = None;
    for _ in 0..6 {
        let result = match scan_and_refine(&problem, cfg, sxx_max, xf_max) {
            Ok(r) => r,
            Err(NoiseError::EmptyFeasibleRegion) => {
                sxx_max *= 4.0;
                xf_max *= 4.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        let t = &result.argmin_triad;
        let inside = t.s_xx < 0.5 * sxx_max && t.s_xf.re.abs() < 0.5 * xf_max && t.s_xf.im.abs() < 0.5 * xf_max;
        if inside {
            return Ok(result);
        }
        last = Some(result);
        sxx_max *= 4.0;
        xf_max *= 4.0;
    }
    last.ok_or(NoiseError::EmptyFeasibleRegion)
}

fn scan_and_refine(p: &Problem, cfg: &OracleConfig, sxx_max: f64, xf_max: f64) -> Result<OracleResult> {
    let n = cfg.coarse_grid_points;
    let axis = |i: usize, half: f64| -half + 2.0 * half * (i as f64 + 0.5) / n as f64;
    let mut best = (f64::INFINITY, NoiseTriad::new(0.0, Complex::new(0.0, 0.0), p.s_ff));
    let mut feasible = 0usize;
    let total;

    match cfg.mode {
        OracleMode::FullGrid => {
            total = n * n * n;
            for i in 0..n {
                let re = axis(i, xf_max);
                for j in 0..n {
                    let im = axis(j, xf_max);
                    for l in 0..n {
                        let s_xx = sxx_max * (l as f64 + 1.0) / n as f64;
                        let t = NoiseTriad::new(s_xx, Complex::new(re, im), p.s_ff);
                        if uncertainty_slack(&t, p.k, p.hbar) < 0.0 {
                            continue;
                        }
                        feasible += 1;
                        let v = sum_noise_psd(&t, p.chi_inv, p.k);
                        if v < best.0 {
                            best = (v, t);
                        }
                    }
                }
            }
        }
        OracleMode::Surface => {
            total = n * n;
            for i in 0..n {
                for j in 0..n {
                    let x = [axis(i, xf_max), axis(j, xf_max)];
                    let v = p.surface_value(&x);
                    if v.is_finite() {
                        feasible += 1;
                        if v < best.0 {
                            let s_xf = Complex::new(x[0], x[1]);
                            let s_xx = min_feasible_sxx(s_xf, p.k, p.s_ff, p.hbar).unwrap_or(0.0);
                            best = (v, NoiseTriad::new(s_xx, s_xf, p.s_ff));
                        }
                    }
                }
            }
        }
    }
    // The feasible S_xF set is the intersection of two discs centred at
    // ±iħ/2; near the FDT bound one of them shrinks below the grid spacing.
    for center in [0.5 * p.hbar, -0.5 * p.hbar] {
        let x = [0.0, center];
        let v = p.surface_value(&x);
        if v < best.0 {
            let s_xf = Complex::new(0.0, center);
            let s_xx = min_feasible_sxx(s_xf, p.k, p.s_ff, p.hbar).unwrap_or(0.0);
            best = (v, NoiseTriad::new(s_xx, s_xf, p.s_ff));
        }
    }
    if !best.0.is_finite() {
        return Err(NoiseError::EmptyFeasibleRegion);
    }

    let mut x = vec![best.1.s_xf.re, best.1.s_xf.im];
    let mut fx = p.surface_value(&x).min(best.0);
    if !p.surface_value(&x).is_finite() {
        fx = best.0;
    }
    let mut iterations = 0;
    let mut step = 2.0 * xf_max / n as f64;
    for restart in 0..cfg.refine_iterations {
        // rotate the start simplex so restarts can slide along the σ = 0 ridge
        let angle = 2.399_963_229_728_653 * restart as f64;
        let simplex = [
            x.clone(),
            vec![x[0] + step * angle.cos(), x[1] + step * angle.sin()],
            vec![x[0] - step * angle.sin(), x[1] + step * angle.cos()],
        ];
        let nm = nelder_mead(|v| p.surface_value(v), simplex.to_vec(), cfg.rel_tolerance * 1e-6, 4000);
        iterations += nm.iterations;
        let improved = fx - nm.fmin;
        if nm.fmin < fx {
            x = nm.xmin;
            fx = nm.fmin;
        }
        if improved <= cfg.rel_tolerance * 1e-4 * fx.abs() {
            step *= 0.1;
            if step < 1e-9 * (xf_max + 1e-300) {
                break;
            }
        }
    }

    let s_xf = Complex::new(x[0], x[1]);
    let refined = min_feasible_sxx(s_xf, p.k, p.s_ff, p.hbar).map(|s_xx| {
        let t = NoiseTriad::new(s_xx, s_xf, p.s_ff);
        (sum_noise_psd(&t, p.chi_inv, p.k), t)
    });
    let (s_sum_min, argmin) = match refined {
        Some(r) if cfg.refine_iterations > 0 && r.0 <= best.0 => r,
        _ => best,
    };
    Ok(OracleResult {
        s_sum_min,
        argmin_triad: argmin,
        iterations,
        feasible_fraction: feasible as f64 / total as f64,
    })
}

struct NmResult {
    xmin: Vec<f64>,
    fmin: f64,
    iterations: usize,
}

/// Plain Nelder–Mead (reflection 1, expansion 2, contraction ½, shrink ½).
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, mut simplex: Vec<Vec<f64>>, ftol: f64, max_iter: usize) -> NmResult {
    let dim = simplex.len() - 1;
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[dim]);
        if worst.is_finite() && (worst - best).abs() <= ftol * (best.abs() + 1e-300) {
            break;
        }

        let centroid: Vec<f64> = (0..dim).map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..dim).map(|j| centroid[j] + t * (simplex[dim][j] - centroid[j])).collect() };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[dim] {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = xc;
            values[dim] = fc;
            continue;
        }
        for i in 1..=dim {
            for j in 0..dim {
                simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
            }
            values[i] = f(&simplex[i]);
        }
    }
    let (imin, _) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    NmResult { xmin: simplex[imin].clone(), fmin: values[imin], iterations }
}

/// Random triad on the saturation surface: `S_xF` uniform in the disc of
/// radius `2ħ`, `S_xx` from [`min_feasible_sxx`]. Deterministic per seed.
pub fn random_saturating_triad(k: BackAction<f64>, s_ff: f64, seed: u64, hbar: f64) -> Result<NoiseTriad<f64>> {
    require_meter_fdt(k, s_ff, hbar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 2.0 * hbar;
    const RETRIES: usize = 1000;
    for _ in 0..RETRIES {
        let (re, im): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if re * re + im * im > 1.0 {
            continue;
        }
        let s_xf = Complex::new(radius * re, radius * im);
        let Some(s_xx) = min_feasible_sxx(s_xf, k, s_ff, hbar) else { continue };
        let t = NoiseTriad::new(s_xx, s_xf, s_ff);
        if uncertainty_slack(&t, k, hbar).abs() <= 1e-12 {
            return Ok(t);
        }
    }
    Err(NoiseError::Sampler { retries: RETRIES })
}
