//! Closed-form minimization of the sum quantum noise over quantum-limited
//! meters.
//!
//! Two conditional problems are solved at a single frequency:
//!
//! * fixed *effective* back-action PSD `S_𝓕𝓕` with a real gauge `𝒦′`
//!   ([`optimize_fixed_eff_backaction`]);
//! * fixed *physical* back-action PSD `S_FF` with arbitrary dynamic back
//!   action `K` ([`optimize_fixed_backaction`]).
//!
//! Both have a threshold above which the optimum is pinned to the DQL
//! `ħ|Im χ⁻¹|` when the meter is allowed a nonzero σ, and a QCRB-like
//! branch below it. At the threshold the second derivative of the optimum
//! jumps.

use num_complex::Complex;

use crate::error::{domain, NoiseError, Result};
use crate::meter::{BackAction, GaugeKernel, NoiseTriad};
use crate::scalar::{abs2, sign0, Real};

/// Which bound the optimized sum noise sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Below threshold: limited by the finite probing strength.
    QcrbLimited,
    /// The optimum equals the DQL.
    DqlLimited,
    /// σ-constrained optimum above threshold; the excess back action pushes
    /// the sum noise back above the DQL.
    OverThreshold,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::QcrbLimited => "qcrb",
            Self::DqlLimited => "dql",
            Self::OverThreshold => "over_threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "qcrb" => Some(Self::QcrbLimited),
            "dql" => Some(Self::DqlLimited),
            "over_threshold" => Some(Self::OverThreshold),
            _ => None,
        }
    }
}

/// Result of a conditional optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumReport<T> {
    pub s_sum: T,
    pub regime: Regime,
    /// `+∞` for a lossless probe.
    pub s_threshold: T,
    /// Saturating triad attaining `s_sum`. For the fixed-`S_𝓕𝓕` problem this
    /// is the effective triad `(S_xx, S_x𝓕, S_𝓕𝓕)`.
    pub optimal_triad: NoiseTriad<T>,
    /// Back action to pair with `optimal_triad` (`K`, or `𝒦′` for the
    /// effective problem).
    pub triad_back_action: BackAction<T>,
    pub sigma_opt: T,
    pub constrained_sigma_zero: bool,
}

/// One row of a noise budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPoint<T> {
    pub omega: T,
    pub sql: T,
    pub dql: T,
    pub s_thr: T,
    pub s_sum_opt: T,
    pub s_fdt: T,
    pub s_total: T,
    pub regime: Regime,
    pub sigma_opt: T,
    pub optimal_triad: NoiseTriad<T>,
}

impl<T: Real> BudgetPoint<T> {
    pub fn new(omega: T, sql: T, dql: T, s_fdt: T, optimum: &OptimumReport<T>) -> Self {
        Self {
            omega,
            sql,
            dql,
            s_thr: optimum.s_threshold,
            s_sum_opt: optimum.s_sum,
            s_fdt,
            s_total: optimum.s_sum + s_fdt,
            regime: optimum.regime,
            sigma_opt: optimum.sigma_opt,
            optimal_triad: optimum.optimal_triad,
        }
    }
}

fn require_real_gauge<T: Real>(g: &GaugeKernel<T>) -> Result<T> {
    if g.value().im != T::zero() {
        return Err(domain("fixed-S_𝓕𝓕 optimization needs a real gauge 𝒦′"));
    }
    Ok(g.value().re)
}

fn require_positive_psd<T: Real>(s: T) -> Result<()> {
    if s.is_finite() && s > T::zero() {
        Ok(())
    } else {
        Err(domain(format!("back-action PSD must be finite and > 0, got {s}")))
    }
}

fn require_meter_fdt<T: Real>(k: BackAction<T>, s_ff: T, hbar: T) -> Result<()> {
    let bound = hbar * k.0.im.abs();
    if s_ff < bound {
        return Err(NoiseError::FdtViolation {
            s_ff: s_ff.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Threshold `ħ|χ_𝒦′⁻¹|² / (2|Im χ⁻¹|)` of the effective back-action PSD.
pub fn threshold_eff<T: Real>(chi_inv: Complex<T>, g: &GaugeKernel<T>, hbar: T) -> Result<T> {
    let kappa = require_real_gauge(g)?;
    let d2 = chi_inv.im.abs();
    if d2 == T::zero() {
        return Err(NoiseError::LosslessProbe);
    }
    let re = chi_inv.re + kappa;
    Ok(hbar / T::lit(2.0) * (re * re / d2 + d2))
}

/// Minimum of the sum noise over saturating meters at fixed `S_𝓕𝓕` and real
/// gauge `𝒦′`, with `Im S_x𝓕` free.
pub fn optimize_fixed_eff_backaction<T: Real>(
    chi_inv: Complex<T>,
    g: &GaugeKernel<T>,
    s_eff_ff: T,
    hbar: T,
) -> Result<OptimumReport<T>> {
    fixed_eff(chi_inv, g, s_eff_ff, hbar, false)
}

/// As [`optimize_fixed_eff_backaction`] with `Im S_x𝓕 = 0` imposed: no
/// phase transition, single minimum at the threshold.
pub fn optimize_fixed_eff_backaction_sigma_zero<T: Real>(
    chi_inv: Complex<T>,
    g: &GaugeKernel<T>,
    s_eff_ff: T,
    hbar: T,
) -> Result<OptimumReport<T>> {
    fixed_eff(chi_inv, g, s_eff_ff, hbar, true)
}

fn fixed_eff<T: Real>(
    chi_inv: Complex<T>,
    g: &GaugeKernel<T>,
    s: T,
    hbar: T,
    sigma_zero: bool,
) -> Result<OptimumReport<T>> {
    let kappa = require_real_gauge(g)?;
    require_positive_psd(s)?;
    let two = T::lit(2.0);
    let quarter_h2 = hbar * hbar / T::lit(4.0);
    let inv_eff = Complex::new(chi_inv.re + kappa, chi_inv.im);
    if abs2(inv_eff) == T::zero() {
        return Err(domain("effective inverse susceptibility χ⁻¹ + 𝒦′ vanishes"));
    }
    let chi_eff = inv_eff.inv();
    let d2 = chi_inv.im.abs();

    let (s_sum, regime, thr, excess) = if d2 == T::zero() {
        // lossless probe: QCRB at fixed S_𝓕𝓕, no threshold
        (hbar * hbar * abs2(inv_eff) / (T::lit(4.0) * s), Regime::QcrbLimited, T::infinity(), T::zero())
    } else {
        let thr = threshold_eff(chi_inv, g, hbar)?;
        let dql = hbar * d2;
        let ub = dql / two * (thr / s + s / thr);
        if s < thr {
            (ub, Regime::QcrbLimited, thr, T::zero())
        } else if sigma_zero {
            let regime = if s == thr { Regime::DqlLimited } else { Regime::OverThreshold };
            (ub, regime, thr, T::zero())
        } else {
            (dql, Regime::DqlLimited, thr, s - thr)
        }
    };

    let s_xf = Complex::new(-s * chi_eff.re, -chi_eff.im * excess);
    let s_xx = (abs2(s_xf) + hbar * s_xf.im.abs() + quarter_h2) / s;
    Ok(OptimumReport {
        s_sum,
        regime,
        s_threshold: thr,
        optimal_triad: NoiseTriad::new(s_xx, s_xf, s),
        triad_back_action: BackAction::new(kappa, T::zero()),
        sigma_opt: -s_xf.im,
        constrained_sigma_zero: sigma_zero,
    })
}

/// Threshold of the physical back-action PSD,
/// `(ħ/2)(|χ_K⁻¹|² − 2 Im χ⁻¹ Im K)/|Im χ⁻¹|`.
pub fn threshold_full<T: Real>(chi_inv: Complex<T>, k: BackAction<T>, hbar: T) -> Result<T> {
    let d2 = chi_inv.im.abs();
    if d2 == T::zero() {
        return Err(NoiseError::LosslessProbe);
    }
    let re = chi_inv.re + k.0.re;
    let ki = k.0.im;
    // |χ_K⁻¹|² − 2 Im χ⁻¹ Im K = (Re χ_K⁻¹)² + (Im χ⁻¹)² + (Im K)²
    Ok(hbar / T::lit(2.0) * (re * re / d2 + d2 + ki * ki / d2))
}

/// Upper-branch optimum at fixed `S_FF` (σ = 0).
fn universal_bound<T: Real>(dql: T, thr: T, s_ff: T, k_h: T) -> T {
    let k2 = k_h * k_h;
    let root = ((thr * thr - k2).max(T::zero()) * (s_ff * s_ff - k2).max(T::zero())).sqrt();
    dql * (thr * thr + s_ff * s_ff - k2) / (thr * s_ff + root)
}

/// Minimum of the sum noise over saturating meters at fixed physical `S_FF`
/// and dynamic back action `K`.
///
/// With `allow_sigma` the optimum is the DQL from the threshold on; without
/// it (σ = 0 imposed) the bound has a single minimum at the threshold. A
/// lossless probe falls through to [`qcrb_lossless`].
pub fn optimize_fixed_backaction<T: Real>(
    chi_inv: Complex<T>,
    k: BackAction<T>,
    s_ff: T,
    allow_sigma: bool,
    hbar: T,
) -> Result<OptimumReport<T>> {
    require_positive_psd(s_ff)?;
    require_meter_fdt(k, s_ff, hbar)?;
    let d2 = chi_inv.im;

    let (s_sum, regime, thr, sigma) = if d2 == T::zero() {
        (qcrb_lossless(chi_inv, k, s_ff, hbar)?, Regime::QcrbLimited, T::infinity(), T::zero())
    } else {
        let thr = threshold_full(chi_inv, k, hbar)?;
        let dql = hbar * d2.abs();
        if s_ff < thr {
            let ub = universal_bound(dql, thr, s_ff, hbar * k.0.im.abs());
            (ub, Regime::QcrbLimited, thr, T::zero())
        } else if !allow_sigma {
            let ub = universal_bound(dql, thr, s_ff, hbar * k.0.im.abs());
            let regime = if s_ff == thr { Regime::DqlLimited } else { Regime::OverThreshold };
            (ub, regime, thr, T::zero())
        } else {
            let sigma = -sign0(d2) * d2.abs() * (s_ff - thr) / abs2(chi_inv + k.0);
            (dql, Regime::DqlLimited, thr, sigma)
        }
    };

    let triad = saturating_triad_for_sigma(chi_inv, k, s_ff, sigma, hbar)?;
    Ok(OptimumReport {
        s_sum,
        regime,
        s_threshold: thr,
        optimal_triad: triad,
        triad_back_action: k,
        sigma_opt: sigma,
        constrained_sigma_zero: !allow_sigma,
    })
}

/// Saturating triad minimizing the sum noise at fixed `S_FF` and fixed σ.
///
/// With `Im S_xF = Im K·S_xx − σ` the saturation condition is a circle in
/// `(S_xx, Re S_xF)` and the sum noise is linear there, so the minimizer is
/// the point of the circle opposite the gradient. `S_xx` is evaluated in a
/// rationalized form that does not divide by `(Im K)²`, which keeps it
/// accurate through `Im K → 0`.
fn saturating_triad_for_sigma<T: Real>(
    chi_inv: Complex<T>,
    k: BackAction<T>,
    s_ff: T,
    sigma: T,
    hbar: T,
) -> Result<NoiseTriad<T>> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let inv_k = chi_inv + k.0;
    let ki = k.0.im;
    let a = inv_k.re * inv_k.re + chi_inv.im * chi_inv.im - ki * ki;
    let b = two * inv_k.re * ki;
    let ab2 = a * a + b * b;
    if ab2 == T::zero() {
        return Err(domain("χ⁻¹ + K vanishes: sum noise is independent of the meter triad"));
    }
    let norm = ab2.sqrt();
    let p = s_ff + two * ki * sigma;
    let e = sigma * sigma + hbar * sigma.abs() + hbar * hbar / four;
    let r = (p * p - four * ki * ki * e).max(T::zero()).sqrt();
    let q = a * r / norm;
    let s_xx = if a >= T::zero() {
        two * (p * p * inv_k.re * inv_k.re + a * a * e) / (ab2 * (p + q))
    } else {
        (p - q) / (two * ki * ki)
    };
    let re_xf = -inv_k.re * r / norm;
    let im_xf = ki * s_xx - sigma;
    Ok(NoiseTriad::new(s_xx, Complex::new(re_xf, im_xf), s_ff))
}

/// Simple QCRB `ħ²|χ⁻¹ + K|² / (4 S_FF)`.
pub fn qcrb_simple<T: Real>(chi_inv: Complex<T>, k: BackAction<T>, s_ff: T, hbar: T) -> Result<T> {
    require_positive_psd(s_ff)?;
    Ok(hbar * hbar * abs2(chi_inv + k.0) / (T::lit(4.0) * s_ff))
}

/// Tight QCRB of a lossless probe with dynamic damping:
/// `(ħ²/2)|χ_K⁻¹|² / (S_FF + √(S_FF² − ħ² Im²K))`. Ranges from
/// [`qcrb_simple`] at `Im K = 0` to twice it at `ħ|Im K| = S_FF`.
pub fn qcrb_lossless<T: Real>(chi_inv: Complex<T>, k: BackAction<T>, s_ff: T, hbar: T) -> Result<T> {
    require_positive_psd(s_ff)?;
    if chi_inv.im != T::zero() {
        return Err(domain("qcrb_lossless needs a lossless probe (Im χ⁻¹ = 0)"));
    }
    require_meter_fdt(k, s_ff, hbar)?;
    let k_h = hbar * k.0.im;
    let root = (s_ff * s_ff - k_h * k_h).max(T::zero()).sqrt();
    Ok(hbar * hbar / T::lit(2.0) * abs2(chi_inv + k.0) / (s_ff + root))
}

/// Finite-difference probe of the optimum around the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTransitionProbe<T> {
    pub threshold: T,
    pub step: T,
    /// One-sided first derivatives of the optimized `S_sum` in `S_FF`.
    pub d1_below: T,
    pub d1_above: T,
    /// One-sided second derivatives.
    pub d2_below: T,
    pub d2_above: T,
    /// One-sided slopes of the optimal `Im S_xF` in `S_FF`.
    pub im_sxf_slope_below: T,
    pub im_sxf_slope_above: T,
    /// `im_sxf_slope_above − im_sxf_slope_below`.
    pub d1_jump: T,
}

/// One-sided finite differences of [`optimize_fixed_backaction`] at the
/// threshold, with step `h` in `S_FF`. First derivatives use second-order
/// one-sided stencils.
pub fn phase_transition_probe<T: Real>(
    chi_inv: Complex<T>,
    k: BackAction<T>,
    hbar: T,
    h: T,
    allow_sigma: bool,
) -> Result<PhaseTransitionProbe<T>> {
    let thr = threshold_full(chi_inv, k, hbar)?;
    if !(h > T::zero()) || thr - two_of(h) < hbar * k.0.im.abs() || thr - two_of(h) <= T::zero() {
        return Err(domain("finite-difference step too large for the admissible S_FF range"));
    }
    let eval = |s: T| optimize_fixed_backaction(chi_inv, k, s, allow_sigma, hbar);
    let below = [eval(thr)?, eval(thr - h)?, eval(thr - two_of(h))?];
    let above = [below[0], eval(thr + h)?, eval(thr + two_of(h))?];

    let f = |r: &[OptimumReport<T>; 3]| [r[0].s_sum, r[1].s_sum, r[2].s_sum];
    let g = |r: &[OptimumReport<T>; 3]| {
        [r[0].optimal_triad.s_xf.im, r[1].optimal_triad.s_xf.im, r[2].optimal_triad.s_xf.im]
    };
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    let d1 = |v: [T; 3]| (three * v[0] - four * v[1] + v[2]) / two_of(h);
    let d2 = |v: [T; 3]| (v[0] - two_of(v[1]) + v[2]) / (h * h);

    let d1_below = d1(f(&below));
    let d1_above = -d1(f(&above));
    let im_below = d1(g(&below));
    let im_above = -d1(g(&above));
    Ok(PhaseTransitionProbe {
        threshold: thr,
        step: h,
        d1_below,
        d1_above,
        d2_below: d2(f(&below)),
        d2_above: d2(f(&above)),
        im_sxf_slope_below: im_below,
        im_sxf_slope_above: im_above,
        d1_jump: im_above - im_below,
    })
}

#[inline]
fn two_of<T: Real>(x: T) -> T {
    x + x
}
