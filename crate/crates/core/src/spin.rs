//! Negative-mass reference frame: an interferometric position meter whose
//! light subsequently probes the collective spin of an atomic ensemble.
//!
//! The spin acts as an oscillator with negative effective mass. Its
//! dissipation produces a nonzero σ, so these meters can reach the DQL above
//! threshold, which a σ = 0 meter cannot.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::meter::{GaugeKernel, NoiseTriad};
use crate::optimizer::{optimize_fixed_eff_backaction, optimize_fixed_eff_backaction_sigma_zero};
use crate::scalar::{abs2, sign0, Real};
use crate::spectra::Susceptibility;

/// Effective susceptibility `χ_S` of the spin subsystem.
#[derive(Debug, Clone, PartialEq)]
pub enum SpinResponse<T> {
    /// `χ_S = ±1/χ⁻¹_model(Ω)`; `negative_mass` selects the minus sign.
    Oscillator { model: Susceptibility<T>, negative_mass: bool },
    /// A fixed value, independent of frequency.
    Fixed(Complex<T>),
}

impl<T: Real> SpinResponse<T> {
    /// Negated damped oscillator `−[m_S(Ω_S² − Ω² − iΓ_SΩ)]⁻¹`.
    pub fn negative_mass_oscillator(mass: T, larmor: T, damping: T) -> Result<Self> {
        Ok(Self::Oscillator {
            model: Susceptibility::damped_oscillator(mass, larmor, damping)?,
            negative_mass: true,
        })
    }

    pub fn eval(&self, omega: T) -> Result<Complex<T>> {
        match self {
            Self::Oscillator { model, negative_mass } => {
                let chi = model.chi(omega)?;
                Ok(if *negative_mass { -chi } else { chi })
            }
            Self::Fixed(v) => Ok(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinMeterParams<T> {
    /// Coupling to the mechanical probe; `S_FF = ħθ_I`.
    pub theta_i: T,
    /// Coupling to the spin ensemble.
    pub theta_s: T,
    pub chi_s: SpinResponse<T>,
}

impl<T: Real> SpinMeterParams<T> {
    pub fn new(theta_i: T, theta_s: T, chi_s: SpinResponse<T>) -> Result<Self> {
        if !(theta_i.is_finite() && theta_i >= T::zero() && theta_s.is_finite() && theta_s >= T::zero()) {
            return Err(domain("spin-meter couplings must be finite and ≥ 0"));
        }
        Ok(Self { theta_i, theta_s, chi_s })
    }
}

/// Meter noise spectra of the combined interferometer + spin scheme with a
/// vacuum input field:
///
/// ```text
/// S_xx = ħ/(4θ_I) · (1 + 4θ_S²|χ_S|² + 4θ_S|Im χ_S|)
/// S_FF = ħθ_I
/// S_xF = ħθ_S χ_S
/// ```
pub fn spin_triad<T: Real>(p: &SpinMeterParams<T>, omega: T, hbar: T) -> Result<NoiseTriad<T>> {
    if !(p.theta_i > T::zero()) {
        return Err(domain("θ_I must be > 0 for a functioning meter"));
    }
    let chi_s = p.chi_s.eval(omega)?;
    let four = T::lit(4.0);
    let ts = p.theta_s;
    let s_xx = hbar / (four * p.theta_i) * (T::one() + four * ts * ts * abs2(chi_s) + four * ts * chi_s.im.abs());
    Ok(NoiseTriad::new(s_xx, chi_s * (hbar * ts), hbar * p.theta_i))
}

/// `θ_S χ_S` that mirrors the probe with opposite sign, `−θ_I χ`.
pub fn matched_response<T: Real>(theta_i: T, chi: Complex<T>) -> Complex<T> {
    -chi * theta_i
}

/// Sum noise of the matched scheme:
/// `ħ|Im χ⁻¹| + ħ²/(4|χ|² S_FF)` with `S_FF = ħθ_I`.
pub fn matched_sum_noise<T: Real>(theta_i: T, chi_inv: Complex<T>, hbar: T) -> Result<T> {
    if !(chi_inv.re.is_finite() && chi_inv.im.is_finite()) {
        return Err(domain("probe susceptibility χ vanishes"));
    }
    if !(theta_i > T::zero()) {
        return Err(domain("θ_I must be > 0"));
    }
    let s_ff = hbar * theta_i;
    Ok(hbar * chi_inv.im.abs() + hbar * hbar * abs2(chi_inv) / (T::lit(4.0) * s_ff))
}

/// `θ_S χ_S` realizing the fixed-`S_𝓕𝓕` optimum (gauge `𝒦′ = 0`) at
/// `S_FF = ħθ_I`:
///
/// * `θ_I|Im χ| < 1/2`: `−θ_I Re χ`;
/// * otherwise: `−θ_I χ + (i/2) sign(Im χ)`.
pub fn optimal_spin_response<T: Real>(theta_i: T, chi: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    if theta_i * chi.im.abs() < half {
        Complex::new(-theta_i * chi.re, T::zero())
    } else {
        -chi * theta_i + Complex::new(T::zero(), half * sign0(chi.im))
    }
}

/// Sum-noise comparison at one effective back-action PSD, with zero dynamic
/// back action and zero gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinFigurePoint<T> {
    pub s_ff: T,
    /// Optimum with `Im S_x𝓕` free.
    pub full: T,
    /// Optimum with `Im S_x𝓕 = 0`.
    pub sigma_zero: T,
    /// Matched spin meter with `θ_I = S_𝓕𝓕/ħ`.
    pub spin_matched: T,
}

pub fn spin_figure_point<T: Real>(chi_inv: Complex<T>, s_eff_ff: T, hbar: T) -> Result<SpinFigurePoint<T>> {
    let g = GaugeKernel::real(T::zero());
    Ok(SpinFigurePoint {
        s_ff: s_eff_ff,
        full: optimize_fixed_eff_backaction(chi_inv, &g, s_eff_ff, hbar)?.s_sum,
        sigma_zero: optimize_fixed_eff_backaction_sigma_zero(chi_inv, &g, s_eff_ff, hbar)?.s_sum,
        spin_matched: matched_sum_noise(s_eff_ff / hbar, chi_inv, hbar)?,
    })
}
