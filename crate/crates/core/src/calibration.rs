//! Calibration of the Fickian diffusivity against a target area-averaged
//! deposition rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// [kg/(m2 s)]
    pub target_rate: f64,
    /// `[D_lo, D_hi]` [m2/s]
    pub d_bracket: [f64; 2],
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_rel_tol() -> f64 {
    1e-4
}

fn default_max_iterations() -> usize {
    60
}

impl CalibrationSpec {
    pub fn new(target_rate: f64, d_lo: f64, d_hi: f64) -> Self {
        Self {
            target_rate,
            d_bracket: [d_lo, d_hi],
            rel_tol: default_rel_tol(),
            max_iterations: default_max_iterations(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.d_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!("diffusivity bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        if !(self.target_rate > 0.0 && self.target_rate.is_finite()) {
            return Err(Error::Config(format!("target rate must be positive, got {}", self.target_rate)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub diffusivity: f64,
    pub rate: f64,
    /// Bracket width after this evaluation [m2/s].
    pub bracket_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub diffusivity: f64,
    pub rate: f64,
    pub trace: Vec<TraceRow>,
}

/// `sum(j A) / sum(A)`.
pub fn area_averaged_rate(j: &[f64], areas: &[f64]) -> Result<f64> {
    if j.is_empty() {
        return Err(Error::EmptyInput("deposition results"));
    }
    if j.len() != areas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} fluxes but {} cell areas",
            j.len(),
            areas.len()
        )));
    }
    if let Some(a) = areas.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::NegativeInput {
            quantity: "cell area",
            value: *a,
        });
    }
    let total: f64 = areas.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("total cell area is zero".into()));
    }
    Ok(j.iter().zip(areas).map(|(j, a)| j * a).sum::<f64>() / total)
}

/// Finds `D` with `rate(D) = target`, assuming `rate` increases with `D`.
///
/// Geometric bisection keeps a bracket; once the bracket is narrower than
/// `rel_tol` times its midpoint, a log-log secant step between the bracket
/// ends is tried as the final estimate.
pub fn calibrate_diffusivity(spec: &CalibrationSpec, mut rate: impl FnMut(f64) -> Result<f64>) -> Result<Calibration> {
    spec.validate()?;
    let target = spec.target_rate;
    let [mut lo, mut hi] = spec.d_bracket;
    let (mut r_lo, mut r_hi) = (rate(lo)?, rate(hi)?);
    if !(r_lo < target && target < r_hi) {
        return Err(Error::NotBracketed {
            target,
            rate_lo: r_lo,
            rate_hi: r_hi,
        });
    }
    let miss = |r: f64| (r - target).abs() / target;

    let mut trace = Vec::new();
    let mut best = if miss(r_lo) < miss(r_hi) { (lo, r_lo) } else { (hi, r_hi) };
    for iteration in 1..=spec.max_iterations {
        let narrow = hi - lo < spec.rel_tol * (lo * hi).sqrt();
        let d = if narrow && r_lo > 0.0 {
            let s = (target.ln() - r_lo.ln()) / (r_hi.ln() - r_lo.ln());
            (lo.ln() + s * (hi.ln() - lo.ln())).exp().clamp(lo, hi)
        } else {
            (lo * hi).sqrt()
        };
        let r = rate(d)?;
        if r < target {
            lo = d;
            r_lo = r;
        } else {
            hi = d;
            r_hi = r;
        }
        trace.push(TraceRow {
            iteration,
            diffusivity: d,
            rate: r,
            bracket_width: hi - lo,
        });
        if miss(r) < miss(best.1) {
            best = (d, r);
        }
        if narrow && miss(best.1) < spec.rel_tol {
            return Ok(Calibration {
                diffusivity: best.0,
                rate: best.1,
                trace,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: spec.max_iterations,
        last: miss(best.1),
        history: trace.iter().map(|t| miss(t.rate)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn area_average_examples() {
        assert_eq!(area_averaged_rate(&[3.0; 4], &[0.5; 4]).unwrap(), 3.0);
        assert_eq!(area_averaged_rate(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(area_averaged_rate(&[4.0, 0.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert!(matches!(area_averaged_rate(&[], &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn recovers_planted_diffusivity() {
        let d0 = 3.64e-5;
        let model = |d: f64| Ok(2e-6 * (d / 1e-5).powf(0.8));
        let target = model(d0).unwrap();
        let c = calibrate_diffusivity(&CalibrationSpec::new(target, 1e-6, 1e-3), model).unwrap();
        assert_relative_eq!(c.diffusivity, d0, max_relative = 1e-3);
        assert!(c.trace.len() <= 60);
        assert!(c.trace.windows(2).all(|w| w[1].bracket_width < w[0].bracket_width));
        let last = c.trace.last().unwrap();
        assert!(last.bracket_width < 1e-4 * c.diffusivity);
    }

    #[test]
    fn unbracketed_target_rejected() {
        let model = |d: f64| Ok(d);
        let spec = CalibrationSpec::new(1e-7, 1e-6, 1e-3);
        assert!(matches!(calibrate_diffusivity(&spec, model), Err(Error::NotBracketed { .. })));
    }

    #[test]
    fn iteration_cap_reported() {
        let model = |d: f64| Ok(d);
        let spec = CalibrationSpec {
            max_iterations: 3,
            ..CalibrationSpec::new(3.3e-5, 1e-6, 1e-3)
        };
        assert!(matches!(
            calibrate_diffusivity(&spec, model),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
    }

    proptest! {
        #[test]
        fn average_invariant_under_reordering_and_scaling(
            cells in proptest::collection::vec((0.0f64..1e-5, 1e-3f64..1.0), 1..40),
            scale in 1e-3f64..1e3,
        ) {
            let (j, a): (Vec<f64>, Vec<f64>) = cells.iter().copied().unzip();
            let base = area_averaged_rate(&j, &a).unwrap();
            let tol = 1e-12 * j.iter().fold(0.0f64, |m, v| m.max(*v));
            let (jr, ar): (Vec<f64>, Vec<f64>) = cells.iter().rev().copied().unzip();
            let scaled: Vec<f64> = a.iter().map(|v| v * scale).collect();
            prop_assert!((area_averaged_rate(&jr, &ar).unwrap() - base).abs() <= tol);
            prop_assert!((area_averaged_rate(&j, &scaled).unwrap() - base).abs() <= tol);
        }
    }
}
