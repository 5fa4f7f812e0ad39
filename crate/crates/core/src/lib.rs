//! Quantum noise limits of stationary linear force sensors.
//!
//! A probe with inverse susceptibility `χ⁻¹(Ω)` is read out by a meter
//! characterised by its noise spectra `(S_xx, S_xF, S_FF)` and dynamical
//! back action `K`. This crate computes the standard quantum limit, the
//! dissipative quantum limit, the closed-form optimum of the sum noise at a
//! fixed back-action budget, and the threshold between the regimes where
//! quantum Cramér–Rao and dissipation limit the sensitivity.
//!
//! All routines are generic over [`Real`] (`f32`, `f64`). The brute-force
//! [`oracle`] is `f64` only.

pub mod error;
pub mod meter;
pub mod optimizer;
pub mod oracle;
pub mod scalar;
pub mod spectra;
pub mod spin;

pub use error::{NoiseError, Result};
pub use meter::{
    apply_feedback, commutator_check, feedback_equivalent_gauge, gauge_transform, local_uncertainty_pair, sigma,
    sum_noise_psd, uncertainty_slack, BackAction, CommutatorBalance, CommutatorSpectra, GaugeKernel, GaugedMeter,
    NoiseTriad,
};
pub use optimizer::{
    optimize_fixed_backaction, optimize_fixed_eff_backaction, optimize_fixed_eff_backaction_sigma_zero,
    phase_transition_probe, qcrb_lossless, qcrb_simple, threshold_eff, threshold_full, BudgetPoint, OptimumReport,
    PhaseTransitionProbe, Regime,
};
pub use scalar::Real;
pub use spectra::{dql, fdt_psd, sql, PhysConstants, Susceptibility, ThermalModel};
pub use spin::{
    matched_response, matched_sum_noise, optimal_spin_response, spin_figure_point, spin_triad, SpinFigurePoint,
    SpinMeterParams, SpinResponse,
};

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;

pub type SusceptibilityF64 = Susceptibility<f64>;
pub type SusceptibilityF32 = Susceptibility<f32>;
pub type ThermalModelF64 = ThermalModel<f64>;
pub type ThermalModelF32 = ThermalModel<f32>;
pub type PhysConstantsF64 = PhysConstants<f64>;
pub type PhysConstantsF32 = PhysConstants<f32>;
pub type NoiseTriadF64 = NoiseTriad<f64>;
pub type NoiseTriadF32 = NoiseTriad<f32>;
pub type BackActionF64 = BackAction<f64>;
pub type BackActionF32 = BackAction<f32>;
pub type GaugeKernelF64 = GaugeKernel<f64>;
pub type GaugeKernelF32 = GaugeKernel<f32>;
pub type OptimumReportF64 = OptimumReport<f64>;
pub type OptimumReportF32 = OptimumReport<f32>;
pub type BudgetPointF64 = BudgetPoint<f64>;
pub type BudgetPointF32 = BudgetPoint<f32>;
pub type SpinMeterParamsF64 = SpinMeterParams<f64>;
pub type SpinMeterParamsF32 = SpinMeterParams<f32>;
