//! Probe-side physics: susceptibility models and the frequency-local scalar
//! limits (SQL, DQL and the thermal force floor).
//!
//! Sign convention for the inverse response of a damped oscillator:
//!
//! ```text
//! χ⁻¹(Ω) = m (Ω₀² − Ω²) − i m Γ Ω
//! ```
//!
//! so `Im χ⁻¹(Ω) ≤ 0` for `Ω > 0`. Only positive frequencies are exposed;
//! negative ones follow from `χ⁻¹(−Ω) = conj χ⁻¹(Ω)`.

use num_complex::Complex;

use crate::error::{domain, NoiseError, Result};
use crate::scalar::Real;

/// Probe susceptibility, described through its inverse response `χ⁻¹(Ω)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Susceptibility<T> {
    DampedOscillator { mass: T, omega0: T, damping: T },
    FreeMass { mass: T, damping: T },
    /// Linear interpolation of real and imaginary parts between samples.
    Tabulated { omega: Vec<T>, inv_chi: Vec<Complex<T>> },
}

impl<T: Real> Susceptibility<T> {
    pub fn damped_oscillator(mass: T, omega0: T, damping: T) -> Result<Self> {
        check_positive("mass", mass)?;
        check_non_negative("eigenfrequency", omega0)?;
        check_non_negative("damping rate", damping)?;
        Ok(Self::DampedOscillator { mass, omega0, damping })
    }

    pub fn free_mass(mass: T, damping: T) -> Result<Self> {
        check_positive("mass", mass)?;
        check_non_negative("damping rate", damping)?;
        Ok(Self::FreeMass { mass, damping })
    }

    /// Tabulated inverse response; the grid must be strictly increasing and
    /// positive.
    pub fn tabulated(omega: Vec<T>, inv_chi: Vec<Complex<T>>) -> Result<Self> {
        check_grid(&omega)?;
        if omega.len() != inv_chi.len() {
            return Err(domain(format!(
                "tabulated susceptibility has {} frequencies but {} samples",
                omega.len(),
                inv_chi.len()
            )));
        }
        if inv_chi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("tabulated susceptibility contains non-finite samples"));
        }
        Ok(Self::Tabulated { omega, inv_chi })
    }

    /// `χ⁻¹(Ω)` for `Ω > 0`.
    pub fn inv_chi(&self, omega: T) -> Result<Complex<T>> {
        check_frequency(omega)?;
        Ok(match self {
            Self::DampedOscillator { mass, omega0, damping } => Complex::new(
                *mass * (*omega0 * *omega0 - omega * omega),
                -*mass * *damping * omega,
            ),
            Self::FreeMass { mass, damping } => {
                Complex::new(-*mass * omega * omega, -*mass * *damping * omega)
            }
            Self::Tabulated { omega: grid, inv_chi } => interpolate(grid, inv_chi, omega)?,
        })
    }

    /// `χ(Ω) = 1/χ⁻¹(Ω)`.
    pub fn chi(&self, omega: T) -> Result<Complex<T>> {
        let inv = self.inv_chi(omega)?;
        if inv.re == T::zero() && inv.im == T::zero() {
            return Err(domain("inverse susceptibility vanishes, χ is singular"));
        }
        Ok(inv.inv())
    }
}

/// Temperature of the probe's thermal bath.
#[derive(Debug, Clone, PartialEq)]
pub enum ThermalModel<T> {
    Zero,
    Uniform { temperature: T },
    /// Frequency-dependent effective temperature, linearly interpolated.
    EffectiveSpectrum { omega: Vec<T>, temperature: Vec<T> },
}

impl<T: Real> ThermalModel<T> {
    pub fn uniform(temperature: T) -> Result<Self> {
        check_non_negative("temperature", temperature)?;
        Ok(Self::Uniform { temperature })
    }

    pub fn effective_spectrum(omega: Vec<T>, temperature: Vec<T>) -> Result<Self> {
        check_grid(&omega)?;
        if omega.len() != temperature.len() {
            return Err(domain("effective temperature table length mismatch"));
        }
        for &t in &temperature {
            check_non_negative("effective temperature", t)?;
        }
        Ok(Self::EffectiveSpectrum { omega, temperature })
    }

    pub fn temperature(&self, omega: T) -> Result<T> {
        match self {
            Self::Zero => Ok(T::zero()),
            Self::Uniform { temperature } => Ok(*temperature),
            Self::EffectiveSpectrum { omega: grid, temperature } => {
                check_frequency(omega)?;
                interpolate(grid, temperature, omega)
            }
        }
    }
}

/// Physical constants threaded through every formula. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConstants<T> {
    pub hbar: T,
    pub boltzmann: T,
}

impl<T: Real> PhysConstants<T> {
    pub fn new(hbar: T, boltzmann: T) -> Result<Self> {
        check_positive("ħ", hbar)?;
        check_positive("k_B", boltzmann)?;
        Ok(Self { hbar, boltzmann })
    }

    pub fn natural() -> Self {
        Self { hbar: T::one(), boltzmann: T::one() }
    }
}

impl<T: Real> Default for PhysConstants<T> {
    fn default() -> Self {
        Self::natural()
    }
}

/// Standard quantum limit `ħ|χ⁻¹(Ω)|`.
pub fn sql<T: Real>(model: &Susceptibility<T>, hbar: T, omega: T) -> Result<T> {
    let inv = model.inv_chi(omega)?;
    Ok(hbar * inv.re.hypot(inv.im))
}

/// Dissipative quantum limit `ħ|Im χ⁻¹(Ω)|`.
pub fn dql<T: Real>(model: &Susceptibility<T>, hbar: T, omega: T) -> Result<T> {
    let inv = model.inv_chi(omega)?;
    Ok(hbar * inv.im.abs())
}

/// Thermal force PSD `ħ|Im χ⁻¹| coth(ħΩ / 2k_B T)`.
///
/// At zero temperature the coth factor is exactly one and the result equals
/// [`dql`].
pub fn fdt_psd<T: Real>(
    model: &Susceptibility<T>,
    thermal: &ThermalModel<T>,
    consts: &PhysConstants<T>,
    omega: T,
) -> Result<T> {
    let floor = dql(model, consts.hbar, omega)?;
    let temperature = thermal.temperature(omega)?;
    if temperature == T::zero() {
        return Ok(floor);
    }
    let x = consts.hbar * omega / (T::lit(2.0) * consts.boltzmann * temperature);
    Ok(floor / x.tanh())
}

fn interpolate<T: Real, V>(grid: &[T], values: &[V], omega: T) -> Result<V>
where
    V: Copy + std::ops::Add<Output = V> + std::ops::Sub<Output = V> + std::ops::Mul<T, Output = V>,
{
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if omega < lo || omega > hi {
        return Err(NoiseError::Range {
            omega: omega.to_f64().unwrap_or(f64::NAN),
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    // partition_point gives the first node strictly greater than omega
    let upper = grid.partition_point(|&g| g <= omega);
    let i = upper - 1;
    if grid[i] == omega {
        return Ok(values[i]);
    }
    let t = (omega - grid[i]) / (grid[upper] - grid[i]);
    Ok(values[i] + (values[upper] - values[i]) * t)
}

fn check_frequency<T: Real>(omega: T) -> Result<()> {
    if omega.is_finite() && omega > T::zero() {
        Ok(())
    } else {
        Err(domain(format!("frequency must be finite and > 0, got {omega}")))
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.len() < 2 {
        return Err(domain("tabulated grid needs at least two points"));
    }
    if grid[0] <= T::zero() || !grid.iter().all(|g| g.is_finite()) {
        return Err(domain("tabulated grid must be finite and positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("tabulated grid must be strictly increasing"));
    }
    Ok(())
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_non_negative<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() && v >= T::zero() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and ≥ 0, got {v}")))
    }
}
