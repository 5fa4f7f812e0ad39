//! Meter-side algebra at a single frequency: noise triads, the σ factor,
//! the generalized uncertainty relation, the gauge/feedback transformation
//! of the back-action noise, the sum-noise PSD and commutator spectra.
//!
//! Cross spectra follow `S_xF ∝ ⟨x_fl F_fl†⟩`, so a redefinition
//! `𝓕 = F + Δ·x` gives `S_x𝓕 = conj(Δ) S_xx + S_xF`.

use num_complex::Complex;

use crate::scalar::{abs2, Real};

/// Meter noise spectra at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTriad<T> {
    /// Position imprecision PSD.
    pub s_xx: T,
    /// Cross spectral density of imprecision and back-action noise.
    pub s_xf: Complex<T>,
    /// Back-action force PSD.
    pub s_ff: T,
}

impl<T: Real> NoiseTriad<T> {
    pub fn new(s_xx: T, s_xf: Complex<T>, s_ff: T) -> Self {
        Self { s_xx, s_xf, s_ff }
    }

    /// Whether the triad obeys the uncertainty relation for back action `k`.
    pub fn is_physical(&self, k: BackAction<T>, hbar: T) -> bool {
        self.s_xx >= T::zero() && self.s_ff >= T::zero() && uncertainty_slack(self, k, hbar) >= T::zero()
    }
}

/// Dynamic back-action factor `K(Ω)` (Hooke sign convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackAction<T>(pub Complex<T>);

impl<T: Real> BackAction<T> {
    pub fn new(re: T, im: T) -> Self {
        Self(Complex::new(re, im))
    }

    pub fn zero() -> Self {
        Self(Complex::new(T::zero(), T::zero()))
    }

    pub fn value(self) -> Complex<T> {
        self.0
    }
}

/// Effective back-action factor `𝒦(Ω)` used by the gauge transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeKernel<T> {
    kappa_eff: Complex<T>,
    real_only: bool,
}

impl<T: Real> GaugeKernel<T> {
    pub fn new(kappa_eff: Complex<T>) -> Self {
        Self { kappa_eff, real_only: false }
    }

    /// Real (time-symmetric) gauge `𝒦′`.
    pub fn real(kappa: T) -> Self {
        Self { kappa_eff: Complex::new(kappa, T::zero()), real_only: true }
    }

    pub fn value(&self) -> Complex<T> {
        self.kappa_eff
    }

    pub fn is_real_only(&self) -> bool {
        self.real_only
    }

    /// The kernel viewed as the dynamic back action of the transformed meter.
    pub fn as_back_action(&self) -> BackAction<T> {
        BackAction(self.kappa_eff)
    }
}

/// Commutator spectra of the meter noise sources at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorSpectra<T> {
    pub c_xx: Complex<T>,
    pub c_ff: Complex<T>,
    pub c_xf: Complex<T>,
}

impl<T: Real> CommutatorSpectra<T> {
    /// `C_xx = 0`, `C_xF = −iħ`, `C_FF = −2ħ Im K`.
    pub fn of_meter(k: BackAction<T>, hbar: T) -> Self {
        Self {
            c_xx: Complex::new(T::zero(), T::zero()),
            c_ff: Complex::new(-T::lit(2.0) * hbar * k.0.im, T::zero()),
            c_xf: Complex::new(T::zero(), -hbar),
        }
    }
}

/// Triad and back action after a gauge (or feedback) transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugedMeter<T> {
    /// `(S_xx, S_x𝓕, S_𝓕𝓕)`.
    pub triad: NoiseTriad<T>,
    /// `𝒦`, which plays the role of `K` for the transformed triad.
    pub back_action: BackAction<T>,
}

impl<T: Real> GaugedMeter<T> {
    /// `χ_𝒦⁻¹ = χ⁻¹ + 𝒦`.
    pub fn effective_inv_chi(&self, chi_inv: Complex<T>) -> Complex<T> {
        chi_inv + self.back_action.0
    }
}

/// `σ = Im{K S_xx + conj(S_xF)} = Im K · S_xx − Im S_xF`.
pub fn sigma<T: Real>(triad: &NoiseTriad<T>, k: BackAction<T>) -> T {
    k.0.im * triad.s_xx - triad.s_xf.im
}

/// `S_xx S_FF − |S_xF|² − ħ|σ| − ħ²/4`. Non-negative for physical meters and
/// zero for quantum-limited (saturating) ones. Not smooth in σ.
pub fn uncertainty_slack<T: Real>(triad: &NoiseTriad<T>, k: BackAction<T>, hbar: T) -> T {
    triad.s_xx * triad.s_ff
        - abs2(triad.s_xf)
        - hbar * sigma(triad, k).abs()
        - hbar * hbar / T::lit(4.0)
}

/// The two frequency-local slacks obtained at `+Ω` and `−Ω`:
///
/// ```text
/// S_xx (S_FF ∓ ħ Im K) − |S_xF|² ± ħ Im S_xF − ħ²/4
/// ```
///
/// Both are non-negative iff [`uncertainty_slack`] is; their minimum equals it.
pub fn local_uncertainty_pair<T: Real>(triad: &NoiseTriad<T>, k: BackAction<T>, hbar: T) -> (T, T) {
    let base = abs2(triad.s_xf) + hbar * hbar / T::lit(4.0);
    let plus = triad.s_xx * (triad.s_ff - hbar * k.0.im) - base + hbar * triad.s_xf.im;
    let minus = triad.s_xx * (triad.s_ff + hbar * k.0.im) - base - hbar * triad.s_xf.im;
    (plus, minus)
}

/// Sum quantum noise PSD
/// `|χ_K⁻¹|² S_xx + 2 Re{χ_K⁻¹ S_xF} + S_FF` with `χ_K⁻¹ = χ⁻¹ + K`.
pub fn sum_noise_psd<T: Real>(triad: &NoiseTriad<T>, chi_inv: Complex<T>, k: BackAction<T>) -> T {
    let chi_k_inv = chi_inv + k.0;
    abs2(chi_k_inv) * triad.s_xx + T::lit(2.0) * (chi_k_inv * triad.s_xf).re + triad.s_ff
}

/// Reassigns part of the imprecision noise to an effective back-action force
/// `𝓕 = F + (K − 𝒦) x`. The sum noise, the uncertainty slack and σ are
/// unchanged when the result is evaluated with `𝒦` in place of `K`.
pub fn gauge_transform<T: Real>(triad: &NoiseTriad<T>, k: BackAction<T>, g: &GaugeKernel<T>) -> GaugedMeter<T> {
    shift_back_action(triad, k.0 - g.value(), g.as_back_action())
}

/// Gauge kernel reproduced by a measurement-based feedback force
/// `F_fb = κ x̃`: `𝒦 = K − κ`.
pub fn feedback_equivalent_gauge<T: Real>(k: BackAction<T>, kappa: Complex<T>) -> GaugeKernel<T> {
    GaugeKernel::new(k.0 - kappa)
}

/// Physically closes a feedback loop with gain `κ`: `K → K − κ` and
/// `F_fl → F_fl + κ x_fl`.
pub fn apply_feedback<T: Real>(triad: &NoiseTriad<T>, k: BackAction<T>, kappa: Complex<T>) -> GaugedMeter<T> {
    shift_back_action(triad, kappa, BackAction(k.0 - kappa))
}

fn shift_back_action<T: Real>(triad: &NoiseTriad<T>, delta: Complex<T>, back_action: BackAction<T>) -> GaugedMeter<T> {
    let s_xf = delta.conj() * triad.s_xx + triad.s_xf;
    let s_ff = abs2(delta) * triad.s_xx + T::lit(2.0) * (delta * triad.s_xf).re + triad.s_ff;
    GaugedMeter { triad: NoiseTriad::new(triad.s_xx, s_xf, s_ff), back_action }
}

/// Outcome of [`commutator_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorBalance<T> {
    /// Commutator spectrum of the sum noise, `2ħ Im χ⁻¹`.
    pub c_sum: T,
    /// Commutator spectrum of the probe thermal force, `−2ħ Im χ⁻¹`.
    pub c_thermal: T,
    /// `c_sum + c_thermal`; zero for a classical meter output.
    pub residual: T,
}

/// Assembles the sum-noise commutator spectrum from the meter commutators
/// and checks that it cancels the probe thermal-force commutator.
pub fn commutator_check<T: Real>(chi_inv: Complex<T>, k: BackAction<T>, hbar: T) -> CommutatorBalance<T> {
    let c = CommutatorSpectra::of_meter(k, hbar);
    let chi_k_inv = chi_inv + k.0;
    let c_sum = (c.c_xx * abs2(chi_k_inv) + (chi_k_inv * c.c_xf) * T::lit(2.0) + c.c_ff).re;
    let c_thermal = -T::lit(2.0) * hbar * chi_inv.im;
    CommutatorBalance { c_sum, c_thermal, residual: c_sum + c_thermal }
}
