//! Interface mass fraction of the depositing species.
//!
//! `X_I = a / (1 + (T_w/b)^c)` with `a` cubic and `b`, `c` quadratic in the
//! inlet velocity. The wall temperature is shifted down by a configurable
//! offset before the logistic is evaluated, and the result is floored by the
//! saturation mass fraction at the actual wall temperature.

mod fit;
mod ingest;

use serde::{Deserialize, Serialize};

pub use fit::{fit_logistic, fit_polynomial, fit_velocity_polynomials, LogisticFit, PolynomialFit, VelocityFit};
pub use ingest::{read_profile_csv, ProfileData, ProfileSample};

use crate::error::{Error, Result};

/// Default wall-temperature offset [K].
pub const DEFAULT_WALL_TEMPERATURE_OFFSET: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Plateau mass fraction [kg/kg].
    pub a: f64,
    /// Threshold temperature [K].
    pub b: f64,
    /// Steepness [-].
    pub c: f64,
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 && self.c > 0.0 && self.a.is_finite() && self.b.is_finite() && self.c.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "logistic parameters must be positive: {self:?}"
            )))
        }
    }
}

pub fn logistic_xi(t_wall: f64, p: &LogisticParams) -> Result<f64> {
    if !(t_wall > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wall temperature must be positive, got {t_wall}"
        )));
    }
    p.validate()?;
    Ok(logistic_unchecked(t_wall, p))
}

pub(crate) fn logistic_unchecked(t: f64, p: &LogisticParams) -> f64 {
    let s = (p.c * (t / p.b).ln()).exp();
    p.a / (1.0 + s)
}

/// Velocity dependence of the logistic parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityPolynomials {
    /// Ascending powers of `u_in`.
    pub a_coeffs: [f64; 4],
    pub b_coeffs: [f64; 3],
    pub c_coeffs: [f64; 3],
    /// Inlet-velocity interval [m/s] on which the fit is valid.
    pub validity: [f64; 2],
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl VelocityPolynomials {
    pub fn params_at_velocity(&self, u_in: f64) -> Result<LogisticParams> {
        let [lo, hi] = self.validity;
        if !(u_in >= lo && u_in <= hi) {
            return Err(Error::OutOfRange {
                quantity: "inlet velocity",
                value: u_in,
                lo,
                hi,
            });
        }
        Ok(LogisticParams {
            a: horner(&self.a_coeffs, u_in),
            b: horner(&self.b_coeffs, u_in),
            c: horner(&self.c_coeffs, u_in),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.validity;
        if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("empty velocity validity interval [{lo}, {hi}]")));
        }
        // the logistic parameters must stay positive over the whole interval
        for k in 0..=64 {
            let u = lo + (hi - lo) * k as f64 / 64.0;
            self.params_at_velocity(u)?
                .validate()
                .map_err(|e| Error::Config(format!("at u_in = {u}: {e}")))?;
        }
        Ok(())
    }
}

/// `max(logistic(T_w - offset), X_sat)`; `x_sat` is the saturation mass
/// fraction at the uncorrected wall temperature.
pub fn interface_mass_fraction(
    t_wall: f64,
    u_in: f64,
    vp: &VelocityPolynomials,
    x_sat: f64,
    offset: f64,
) -> Result<f64> {
    if !(x_sat >= 0.0) {
        return Err(Error::NegativeInput {
            quantity: "saturation mass fraction",
            value: x_sat,
        });
    }
    let p = vp.params_at_velocity(u_in)?;
    let reg = logistic_xi(t_wall - offset, &p)?;
    Ok(reg.max(x_sat))
}

/// Config fragment produced by the fit command and accepted by scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fragment {
    pub interface_bc: FragmentBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentBody {
    pub polynomials: VelocityPolynomials,
}

impl Fragment {
    pub fn new(polynomials: VelocityPolynomials) -> Self {
        Self {
            interface_bc: FragmentBody { polynomials },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fragment is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vp() -> VelocityPolynomials {
        VelocityPolynomials {
            a_coeffs: [4.05e-4, 3e-5, -2e-5, 1e-5],
            b_coeffs: [350.0, -60.0, 20.0],
            c_coeffs: [80.0, 40.0, -20.0],
            validity: [0.2, 0.4],
        }
    }

    #[test]
    fn logistic_midpoint_and_plateau() {
        let p = LogisticParams { a: 4e-4, b: 340.0, c: 60.0 };
        assert_relative_eq!(logistic_xi(340.0, &p).unwrap(), 2e-4, max_relative = 1e-12);
        assert_relative_eq!(logistic_xi(1e-3, &p).unwrap(), 4e-4, max_relative = 1e-12);
        let s = (60.0 * (35.0f64 / 34.0).ln()).exp();
        assert_relative_eq!(logistic_xi(350.0, &p).unwrap(), 4e-4 / (1.0 + s), max_relative = 1e-13);
        assert!(logistic_xi(0.0, &p).is_err());
    }

    #[test]
    fn params_from_polynomials() {
        let flat = VelocityPolynomials {
            a_coeffs: [4e-4, 0.0, 0.0, 0.0],
            b_coeffs: [340.0, 0.0, 0.0],
            c_coeffs: [60.0, 0.0, 0.0],
            validity: [0.1, 0.5],
        };
        let p = flat.params_at_velocity(0.3).unwrap();
        assert_eq!((p.a, p.b, p.c), (4e-4, 340.0, 60.0));

        let v = vp();
        let p = v.params_at_velocity(0.3).unwrap();
        let u: f64 = 0.3;
        let a = 4.05e-4 + u * (3e-5 + u * (-2e-5 + u * 1e-5));
        assert_relative_eq!(p.a, a, max_relative = 1e-14);
        assert_relative_eq!(p.b, 350.0 - 60.0 * u + 20.0 * u * u, max_relative = 1e-14);
        assert!(matches!(v.params_at_velocity(0.5), Err(Error::OutOfRange { .. })));
        v.validate().unwrap();
    }

    #[test]
    fn clamp_and_offset() {
        let v = vp();
        // far above threshold the saturation floor wins
        let x = interface_mass_fraction(420.0, 0.3, &v, 1.2e-5, 6.5).unwrap();
        assert_eq!(x, 1.2e-5);
        // low temperature sits on the plateau
        let p = v.params_at_velocity(0.3).unwrap();
        let x = interface_mass_fraction(290.0, 0.3, &v, 1e-5, 6.5).unwrap();
        assert_relative_eq!(x, p.a, max_relative = 1e-3);
        let corrected = interface_mass_fraction(p.b, 0.3, &v, 0.0, 6.5).unwrap();
        let raw = interface_mass_fraction(p.b, 0.3, &v, 0.0, 0.0).unwrap();
        assert!(corrected >= raw);
    }

    #[test]
    fn fragment_round_trip() {
        let f = Fragment::new(vp());
        let text = f.to_toml();
        assert!(text.contains("[interface_bc.polynomials]"));
        assert_eq!(Fragment::from_toml(&text).unwrap(), f);
    }

    proptest! {
        #[test]
        fn logistic_decreasing_in_temperature(t in 250.0f64..450.0, dt in 1e-3f64..20.0) {
            let p = LogisticParams { a: 4e-4, b: 340.0, c: 60.0 };
            prop_assert!(logistic_xi(t + dt, &p).unwrap() < logistic_xi(t, &p).unwrap());
        }

        #[test]
        fn logistic_increasing_in_plateau(a in 1e-5f64..1e-3, t in 300.0f64..360.0) {
            let p = LogisticParams { a, b: 340.0, c: 60.0 };
            let q = LogisticParams { a: a * 1.01, ..p };
            prop_assert!(logistic_xi(t, &q).unwrap() > logistic_xi(t, &p).unwrap());
        }
    }
}
