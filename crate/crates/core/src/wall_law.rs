//! Ashrafian–Johansen velocity wall law and its eddy viscosity.
//!
//! ```text
//! u+(y+)  = A atan(y+/A)                                   y+ <= y*+
//!         = (1/kappa) ln((1 + kappa y+)/(1 + kappa y*+)) + u+(y*+)   otherwise
//! nu_t+   = (y+/A)^2                                        y+ <= y*+
//!         = kappa y+                                        otherwise
//! ```
//!
//! On both branches `du+/dy+ = 1/(1 + nu_t+)` exactly, so the law is the
//! constant-property solution of the simplified momentum equation. The eddy
//! viscosity is discontinuous at `y*+`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bracketed_root, RootOptions};

/// Bracket searched for the friction velocity [m/s].
pub const U_TAU_BRACKET: (f64, f64) = (1e-8, 10.0);
/// Relative residual accepted by [`invert_friction_velocity`].
pub const INVERSION_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallLawParams {
    pub kappa: f64,
    pub y_star_plus: f64,
    pub a_inner: f64,
}

impl Default for WallLawParams {
    fn default() -> Self {
        Self {
            kappa: 0.42,
            y_star_plus: 51.98,
            a_inner: 11.4,
        }
    }
}

impl WallLawParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa > 0.0 && self.y_star_plus > 0.0 && self.a_inner > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "wall law constants must be positive: {self:?}"
            )))
        }
    }

    fn u_star(&self) -> f64 {
        self.a_inner * (self.y_star_plus / self.a_inner).atan()
    }

    /// [`u_plus`] without the sign check, for internal hot loops.
    pub(crate) fn u_plus_unchecked(&self, y: f64) -> f64 {
        if y <= self.y_star_plus {
            self.a_inner * (y / self.a_inner).atan()
        } else {
            ((1.0 + self.kappa * y) / (1.0 + self.kappa * self.y_star_plus)).ln() / self.kappa
                + self.u_star()
        }
    }

    pub(crate) fn nu_t_plus_unchecked(&self, y: f64) -> f64 {
        if y <= self.y_star_plus {
            let r = y / self.a_inner;
            r * r
        } else {
            self.kappa * y
        }
    }
}

fn check_non_negative(y_plus: f64) -> Result<()> {
    if y_plus >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeInput {
            quantity: "y+",
            value: y_plus,
        })
    }
}

/// Dimensionless velocity at `y_plus`.
pub fn u_plus(y_plus: f64, p: &WallLawParams) -> Result<f64> {
    check_non_negative(y_plus)?;
    Ok(p.u_plus_unchecked(y_plus))
}

/// Dimensionless turbulent kinematic viscosity at `y_plus`.
pub fn nu_t_plus(y_plus: f64, p: &WallLawParams) -> Result<f64> {
    check_non_negative(y_plus)?;
    Ok(p.nu_t_plus_unchecked(y_plus))
}

/// `int_0^y_plus u+ dy+`, in closed form.
pub fn integrated_u_plus(y_plus: f64, p: &WallLawParams) -> Result<f64> {
    check_non_negative(y_plus)?;
    let a = p.a_inner;
    let inner = |y: f64| a * (y * (y / a).atan() - 0.5 * a * (y / a).powi(2).ln_1p());
    if y_plus <= p.y_star_plus {
        return Ok(inner(y_plus));
    }
    let k = p.kappa;
    let ys = p.y_star_plus;
    let g = |y: f64| (1.0 + k * y) * (k * y).ln_1p() / k - y;
    let outer = (g(y_plus) - g(ys)) / k + (p.u_star() - (k * ys).ln_1p() / k) * (y_plus - ys);
    Ok(inner(ys) + outer)
}

/// Dimensionless thermal resistance
/// `int_0^y_plus Pr / (1 + (Pr/Pr_t) nu_t+) dy+`, in closed form.
pub fn thermal_resistance(y_plus: f64, prandtl: f64, turbulent_prandtl: f64, p: &WallLawParams) -> Result<f64> {
    check_non_negative(y_plus)?;
    if !(prandtl > 0.0 && turbulent_prandtl > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Prandtl numbers must be positive: Pr = {prandtl}, Pr_t = {turbulent_prandtl}"
        )));
    }
    let s = prandtl / turbulent_prandtl;
    let a = p.a_inner;
    let inner = |y: f64| prandtl * a / s.sqrt() * (s.sqrt() * y / a).atan();
    if y_plus <= p.y_star_plus {
        return Ok(inner(y_plus));
    }
    let sk = s * p.kappa;
    let outer = turbulent_prandtl / p.kappa * ((1.0 + sk * y_plus) / (1.0 + sk * p.y_star_plus)).ln();
    Ok(inner(p.y_star_plus) + outer)
}

/// Finds `u_tau` such that `u_known / u_tau = u+(u_tau y_known / nu)`.
///
/// The left side falls and the right side rises with `u_tau`, so the root
/// is unique. Solved in `ln u_tau` over [`U_TAU_BRACKET`].
pub fn invert_friction_velocity(u_known: f64, y_known: f64, nu: f64, p: &WallLawParams) -> Result<f64> {
    if !(u_known > 0.0 && y_known > 0.0 && nu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "friction velocity inversion needs positive inputs: u = {u_known}, y = {y_known}, nu = {nu}"
        )));
    }
    let residual = |s: f64| {
        let u_tau = s.exp();
        (u_known / u_tau).ln() - p.u_plus_unchecked(u_tau * y_known / nu).ln()
    };
    let (lo, hi) = U_TAU_BRACKET;
    let opts = RootOptions {
        f_tol: 0.25 * INVERSION_REL_TOL,
        x_tol: 1e-15,
        max_iterations: 300,
    };
    let s = bracketed_root(residual, lo.ln(), hi.ln(), opts).map_err(|_| Error::NoBracket { lo, hi })?;
    Ok(s.exp())
}
