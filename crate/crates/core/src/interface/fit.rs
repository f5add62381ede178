//! Least-squares fits of the logistic model and of its velocity polynomials.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{logistic_unchecked, LogisticParams, VelocityPolynomials};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;
const STEP_TOL: f64 = 1e-13;
const LAMBDA_MAX: f64 = 1e16;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub rmse: f64,
    /// Estimated covariance of (a, b, c), `s^2 (J^T J)^-1`.
    pub covariance: [[f64; 3]; 3],
    pub iterations: usize,
}

impl LogisticFit {
    /// One-sigma parameter uncertainties.
    pub fn std_errors(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.covariance[i][i].max(0.0).sqrt())
    }
}

fn sum_squares(samples: &[(f64, f64)], p: &LogisticParams) -> f64 {
    samples
        .iter()
        .map(|&(t, x)| (logistic_unchecked(t, p) - x).powi(2))
        .sum()
}

/// Normal equations `J^T J` and `J^T r` at `p`.
fn normal_equations(samples: &[(f64, f64)], p: &LogisticParams) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for &(t, x) in samples {
        let ln_ratio = (t / p.b).ln();
        let s = (p.c * ln_ratio).exp();
        let d = 1.0 + s;
        let j = Vector3::new(
            1.0 / d,
            p.a * s * p.c / (p.b * d * d),
            -p.a * s * ln_ratio / (d * d),
        );
        let r = p.a / d - x;
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

/// Temperature at which the samples first cross half of `a`, by linear
/// interpolation; the median temperature when they never do.
fn half_plateau_temperature(sorted: &[(f64, f64)], a: f64) -> f64 {
    let half = 0.5 * a;
    sorted
        .windows(2)
        .find(|w| (w[0].1 - half) * (w[1].1 - half) <= 0.0 && w[0].1 != w[1].1)
        .map(|w| w[0].0 + (half - w[0].1) * (w[1].0 - w[0].0) / (w[1].1 - w[0].1))
        .unwrap_or(sorted[sorted.len() / 2].0)
}

/// Levenberg-Marquardt fit of `X = a / (1 + (T/b)^c)` to `(T_w, X_I)` samples.
pub fn fit_logistic(samples: &[(f64, f64)]) -> Result<LogisticFit> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData {
            what: "logistic fit",
            needed: 4,
            got: samples.len(),
        });
    }
    if let Some(&(t, x)) = samples.iter().find(|(t, x)| !(*t > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument(format!("bad sample (T = {t}, X = {x})")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    let x_max = sorted.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let x_min = sorted.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    if !(x_max > 0.0) || x_max - x_min <= 1e-12 * x_max {
        return Err(Error::FitDiverged(
            "samples are flat; threshold and steepness are unconstrained".into(),
        ));
    }

    let mut p = LogisticParams {
        a: x_max,
        b: half_plateau_temperature(&sorted, x_max),
        c: 20.0,
    };
    let mut cost = sum_squares(samples, &p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(samples, &p);
        let mut accepted = false;
        let mut small_step = false;
        while lambda < LAMBDA_MAX {
            let mut damped = jtj;
            for i in 0..3 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = LogisticParams {
                a: p.a + step[0],
                b: p.b + step[1],
                c: p.c + step[2],
            };
            let rel_step = (step[0] / p.a).abs().max((step[1] / p.b).abs()).max((step[2] / p.c).abs());
            let trial_cost = if trial.a > 0.0 && trial.b > 0.0 && trial.c > 0.0 {
                sum_squares(samples, &trial)
            } else {
                f64::INFINITY
            };
            if trial_cost <= cost {
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                small_step = rel_step < STEP_TOL;
                break;
            }
            if rel_step < STEP_TOL {
                small_step = true;
                break;
            }
            lambda *= 10.0;
        }
        if small_step || cost == 0.0 {
            break;
        }
        if !accepted {
            // no descent direction left at any damping: accept as converged
            // only if the gradient vanishes to round-off
            let g = jtr.amax();
            let scale = jtj.diagonal().amax().sqrt() * cost.sqrt();
            if g <= 1e-8 * scale.max(f64::MIN_POSITIVE) {
                break;
            }
            return Err(Error::FitDiverged(format!(
                "damping exhausted after {iterations} iterations (cost {cost:e})"
            )));
        }
    }
    if iterations == MAX_ITERATIONS {
        return Err(Error::FitDiverged(format!("no convergence in {MAX_ITERATIONS} iterations")));
    }

    let n = samples.len();
    let (jtj, _) = normal_equations(samples, &p);
    let inverse = jtj
        .try_inverse()
        .ok_or_else(|| Error::FitDiverged("singular normal equations at the optimum".into()))?;
    let sigma2 = cost / (n - 3) as f64;
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = sigma2 * inverse[(i, j)];
        }
    }
    Ok(LogisticFit {
        params: p,
        rmse: (cost / n as f64).sqrt(),
        covariance,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    /// Ascending powers.
    pub coeffs: Vec<f64>,
    pub rms_residual: f64,
}

/// Least-squares polynomial of the given degree through `(x, y)` points;
/// interpolates exactly when there are `degree + 1` points.
pub fn fit_polynomial(points: &[(f64, f64)], degree: usize) -> Result<PolynomialFit> {
    let m = degree + 1;
    if points.len() < m {
        return Err(Error::InsufficientData {
            what: "polynomial fit",
            needed: m,
            got: points.len(),
        });
    }
    let v = DMatrix::from_fn(points.len(), m, |i, j| points[i].0.powi(j as i32));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let qr = v.clone().qr();
    let rhs = qr.q().transpose() * &y;
    let coeffs = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::SingularSystem("polynomial fit: repeated abscissae".into()))?;
    let residual = &v * &coeffs - &y;
    Ok(PolynomialFit {
        coeffs: coeffs.iter().copied().collect(),
        rms_residual: (residual.norm_squared() / points.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFit {
    pub polynomials: VelocityPolynomials,
    /// RMS residuals of the a, b and c fits.
    pub residuals: [f64; 3],
}

/// Cubic in `u_in` for `a`, quadratics for `b` and `c`.
pub fn fit_velocity_polynomials(per_velocity: &[(f64, LogisticParams)]) -> Result<VelocityFit> {
    if per_velocity.len() < 4 {
        return Err(Error::InsufficientData {
            what: "velocity polynomials",
            needed: 4,
            got: per_velocity.len(),
        });
    }
    let column = |f: fn(&LogisticParams) -> f64| -> Vec<(f64, f64)> {
        per_velocity.iter().map(|(u, p)| (*u, f(p))).collect()
    };
    let a = fit_polynomial(&column(|p| p.a), 3)?;
    let b = fit_polynomial(&column(|p| p.b), 2)?;
    let c = fit_polynomial(&column(|p| p.c), 2)?;
    let lo = per_velocity.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let hi = per_velocity.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(VelocityFit {
        polynomials: VelocityPolynomials {
            a_coeffs: [a.coeffs[0], a.coeffs[1], a.coeffs[2], a.coeffs[3]],
            b_coeffs: [b.coeffs[0], b.coeffs[1], b.coeffs[2]],
            c_coeffs: [c.coeffs[0], c.coeffs[1], c.coeffs[2]],
            validity: [lo, hi],
        },
        residuals: [a.rms_residual, b.rms_residual, c.rms_residual],
    })
}
