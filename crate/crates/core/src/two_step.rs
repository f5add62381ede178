//! Two-step crystallization fouling model: bulk-to-wall mass transfer in
//! series with a second-order surface integration step.
//!
//! ```text
//! j = beta [ D/2 + dC - sqrt(D^2/4 + D dC) ],   D = beta rho u_tau^2 / (k_r mu)
//! ```
//!
//! When surface integration controls (`D >> dC`) this reduces to
//! `j = k_r dC^2 mu / (rho u_tau^2)`.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Universal gas constant [J/(mol K)].
pub const GAS_CONSTANT: f64 = 8.314462618;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TwoStepForm {
    Full,
    #[default]
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoStepParams {
    /// Pre-exponential factor [m4/(kg s2)].
    pub k0: f64,
    /// [J/mol]
    pub activation_energy: f64,
    /// Mass transfer coefficient [m/s].
    pub mass_transfer_coefficient: f64,
    pub gas_constant: f64,
    pub form: TwoStepForm,
}

impl Default for TwoStepParams {
    fn default() -> Self {
        Self {
            k0: 1.62e22,
            activation_energy: 1.48e5,
            mass_transfer_coefficient: 1e-4,
            gas_constant: GAS_CONSTANT,
            form: TwoStepForm::Reduced,
        }
    }
}

impl TwoStepParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k0 > 0.0
            && self.activation_energy >= 0.0
            && self.mass_transfer_coefficient > 0.0
            && self.gas_constant > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid two-step parameters: {self:?}")))
        }
    }
}

/// Arrhenius surface-integration rate constant `k0 exp(-Ea / (R T))`.
pub fn rate_constant(t: f64, p: &TwoStepParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {t}")));
    }
    Ok(p.k0 * (-p.activation_energy / (p.gas_constant * t)).exp())
}

/// Volumetric concentration `C = rho X` [kg/m3]. All conversions between
/// mass fractions and concentrations go through here.
pub fn concentration(rho: f64, mass_fraction: f64) -> f64 {
    rho * mass_fraction
}

/// Local state entering the two-step rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepInputs {
    /// Bulk concentration [kg/m3].
    pub c_bulk: f64,
    /// Saturation concentration at the wall [kg/m3].
    pub c_sat: f64,
    pub u_tau: f64,
    pub mu: f64,
    pub rho: f64,
    pub temperature: f64,
}

impl TwoStepInputs {
    fn driving_force(&self) -> Result<f64> {
        for (name, v) in [("u_tau", self.u_tau), ("mu", self.mu), ("rho", self.rho)] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.c_bulk < self.c_sat {
            return Err(Error::NegativeDriving {
                c_bulk: self.c_bulk,
                c_sat: self.c_sat,
            });
        }
        Ok(self.c_bulk - self.c_sat)
    }
}

/// Full two-step rate, evaluated as
/// `beta dC^2 / (D/2 + dC + sqrt(D^2/4 + D dC))` to avoid cancellation.
pub fn deposition_full(s: &TwoStepInputs, p: &TwoStepParams) -> Result<f64> {
    let dc = s.driving_force()?;
    let beta = p.mass_transfer_coefficient;
    let kr = rate_constant(s.temperature, p)?;
    let d = beta * s.rho * s.u_tau * s.u_tau / (kr * s.mu);
    if dc == 0.0 {
        return Ok(0.0);
    }
    if !d.is_finite() {
        // vanishing surface rate
        return Ok(0.0);
    }
    let root = (0.25 * d * d + d * dc).sqrt();
    Ok(beta * dc * dc / (0.5 * d + dc + root))
}

/// Surface-integration-controlled limit.
pub fn deposition_reduced(s: &TwoStepInputs, p: &TwoStepParams) -> Result<f64> {
    let dc = s.driving_force()?;
    let kr = rate_constant(s.temperature, p)?;
    Ok(kr * dc * dc * s.mu / (s.rho * s.u_tau * s.u_tau))
}

/// Evaluates the configured form; undersaturated states give zero flux and
/// are tallied in `undersaturated`.
pub fn deposition(s: &TwoStepInputs, p: &TwoStepParams, undersaturated: &AtomicUsize) -> Result<f64> {
    let r = match p.form {
        TwoStepForm::Full => deposition_full(s, p),
        TwoStepForm::Reduced => deposition_reduced(s, p),
    };
    match r {
        Err(Error::NegativeDriving { .. }) => {
            undersaturated.fetch_add(1, Ordering::Relaxed);
            Ok(0.0)
        }
        other => other,
    }
}
