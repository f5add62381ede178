//! Bracketed scalar root finding: bisection safeguarding false-position
//! (secant through the bracket ends) steps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Accept `x` once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    /// Accept once the bracket is narrower than this.
    pub x_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 0.0,
            x_tol: 1e-14,
            max_iterations: 200,
        }
    }
}

/// Finds a root of `f` in `[lo, hi]`. `f(lo)` and `f(hi)` must differ in
/// sign (or one of them vanish).
pub fn bracketed_root(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    opts: RootOptions,
) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    if fa.abs() <= opts.f_tol || fa == 0.0 {
        return Ok(a);
    }
    if fb.abs() <= opts.f_tol || fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }

    let mut bisect_next = false;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..opts.max_iterations {
        let mid = 0.5 * (a + b);
        let x = if bisect_next {
            mid
        } else {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                s
            } else {
                mid
            }
        };
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::NoBracket { lo: a, hi: b });
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= opts.f_tol || fx == 0.0 {
            return Ok(x);
        }
        let width = b - a;
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        bisect_next = b - a > 0.5 * width;
        if b - a <= opts.x_tol {
            return Ok(best.0);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        for target in [2.0_f64, 50.0, 0.1] {
            let x = bracketed_root(|x| x * x * x - target, 0.0, 10.0, RootOptions::default()).unwrap();
            assert!((x - target.cbrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_bracket_and_decreasing_function() {
        let x = bracketed_root(|x| 1.0 - x, 5.0, -3.0, RootOptions::default()).unwrap();
        assert!((x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn same_sign_is_rejected() {
        assert!(matches!(
            bracketed_root(|x| x * x + 1.0, -1.0, 1.0, RootOptions::default()),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn flat_regions_fall_back_to_bisection() {
        // false position stalls on this one without the safeguard
        let f = |x: f64| if x < 0.7 { -(0.7 - x) * 1e-9 } else { (x - 0.7) * 1e6 };
        let x = bracketed_root(f, 0.0, 1.0, RootOptions::default()).unwrap();
        assert!((x - 0.7).abs() < 1e-12);
    }
}
