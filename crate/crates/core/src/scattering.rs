//! Reflection and transmission at a step of height `U0` at `x = 0`.
//!
//! Region II carries the envelope `e^{-Q(x)}` with `Q = a x`,
//! `a = m1 sqrt(U0)`, so the transmission coefficient decays with depth:
//! `T(x) = T0 e^{-2 a x}`.

use num_complex::Complex64;
use thiserror::Error;

use crate::potential::UnitSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("transmission is defined only in region II (x >= 0), got x = {x}")]
    InvalidRegion { x: f64 },
    #[error("E = {energy} is below the barrier U0 = {u0}; the transmitted amplitude vanishes there")]
    InvalidRegime { energy: f64, u0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    AboveBarrier,
    /// `E = U0`, matched with the above-barrier equations.
    AtBarrier,
    BelowBarrier,
}

impl Regime {
    pub fn classify(energy: f64, u0: f64) -> Self {
        if energy > u0 {
            Regime::AboveBarrier
        } else if energy == u0 {
            Regime::AtBarrier
        } else {
            Regime::BelowBarrier
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::AboveBarrier => "above_barrier",
            Regime::AtBarrier => "at_barrier",
            Regime::BelowBarrier => "below_barrier",
        }
    }
}

/// Sub-barrier amplitude ratios before the growing transmitted wave is
/// discarded. Kept for inspection only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSubBarrier {
    pub b1_over_a1: Complex64,
    pub a2_over_a1: Complex64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoefficients {
    pub regime: Regime,
    pub energy: f64,
    pub u0: f64,
    /// Incident wavenumber `m1 sqrt(E)`.
    pub k: f64,
    /// Barrier constant `m1 sqrt(U0)`.
    pub a: f64,
    pub b1_over_a1: Complex64,
    pub a2_over_a1: Complex64,
    pub r: f64,
    pub t0: f64,
    pub raw: Option<RawSubBarrier>,
}

fn check_inputs(energy: f64, u0: f64) -> Result<(), ScatteringError> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(ScatteringError::InvalidInput(format!("energy must be positive and finite, got {energy}")));
    }
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(ScatteringError::InvalidInput(format!("u0 must be positive and finite, got {u0}")));
    }
    Ok(())
}

/// Matches `psi` and `psi'` at `x = 0` and derives `R` and `T0`.
pub fn match_coefficients(energy: f64, u0: f64, units: &UnitSystem) -> Result<ScatteringCoefficients, ScatteringError> {
    check_inputs(energy, u0)?;
    let regime = Regime::classify(energy, u0);
    let k = units.wavenumber(energy);
    let a = units.wavenumber(u0);
    let i = Complex64::i();

    let coefficients = match regime {
        Regime::AboveBarrier | Regime::AtBarrier => {
            let denom = 2.0 * i * k - a;
            // in terms of r = E / U0 so that E = U0 gives exactly 1/5 and 4/5
            let r4 = 4.0 * (energy / u0);
            ScatteringCoefficients {
                regime,
                energy,
                u0,
                k,
                a,
                b1_over_a1: a / denom,
                a2_over_a1: 2.0 * i * k / denom,
                r: 1.0 / (r4 + 1.0),
                t0: r4 / (r4 + 1.0),
                raw: None,
            }
        }
        Regime::BelowBarrier => {
            let b1 = (i * (k - a) - k) / (i * (k + a) + k);
            let a2 = 2.0 * i * k / (k + i * (k + a));
            ScatteringCoefficients {
                regime,
                energy,
                u0,
                k,
                a,
                // the transmitted wave grows without bound, so A2 = 0 and B1 = -A1
                b1_over_a1: Complex64::new(-1.0, 0.0),
                a2_over_a1: Complex64::new(0.0, 0.0),
                r: 1.0,
                t0: 0.0,
                raw: Some(RawSubBarrier { b1_over_a1: b1, a2_over_a1: a2, r: raw_subbarrier_r(energy, u0)? }),
            }
        }
    };
    Ok(coefficients)
}

/// `T(x) = T0 e^{-2 a x}` for `E >= U0` and `x >= 0`.
pub fn transmission_at(energy: f64, u0: f64, x: f64, units: &UnitSystem) -> Result<f64, ScatteringError> {
    check_inputs(energy, u0)?;
    if !(x >= 0.0) {
        return Err(ScatteringError::InvalidRegion { x });
    }
    if energy < u0 {
        return Err(ScatteringError::InvalidRegime { energy, u0 });
    }
    let c = match_coefficients(energy, u0, units)?;
    Ok(c.t0 * (-2.0 * c.a * x).exp())
}

/// `(E + (sqrt E - sqrt U0)^2) / (E + (sqrt E + sqrt U0)^2)` on `0 < E <= U0`:
/// the sub-barrier reflection before the transmitted amplitude is dropped.
pub fn raw_subbarrier_r(energy: f64, u0: f64) -> Result<f64, ScatteringError> {
    check_inputs(energy, u0)?;
    if energy > u0 {
        return Err(ScatteringError::InvalidInput(format!("raw sub-barrier R needs E <= U0, got E = {energy}, U0 = {u0}")));
    }
    let s = (energy / u0).sqrt();
    let r = energy / u0;
    Ok((r + (s - 1.0) * (s - 1.0)) / (r + (s + 1.0) * (s + 1.0)))
}

/// Textbook step reflection `((K - K2) / (K + K2))^2` above the step, 1 below.
pub fn standard_step_r(energy: f64, u0: f64, units: &UnitSystem) -> Result<f64, ScatteringError> {
    check_inputs(energy, u0)?;
    if energy <= u0 {
        return Ok(1.0);
    }
    let k = units.wavenumber(energy);
    let k2 = units.wavenumber(energy - u0);
    let ratio = (k - k2) / (k + k2);
    Ok(ratio * ratio)
}

/// Textbook flux transmission `4 K K2 / (K + K2)^2` above the step, 0 below.
pub fn standard_step_t(energy: f64, u0: f64, units: &UnitSystem) -> Result<f64, ScatteringError> {
    check_inputs(energy, u0)?;
    if energy <= u0 {
        return Ok(0.0);
    }
    let k = units.wavenumber(energy);
    let k2 = units.wavenumber(energy - u0);
    Ok(4.0 * k * k2 / ((k + k2) * (k + k2)))
}
