//! Conservative finite differences for `d/dy [A phi + G dphi/dy] = 0`.
//!
//! Points are the wall (index 0) followed by the mesh nodes; the last point
//! is the bulk. Face conductances are harmonic means of node values, face
//! advection coefficients are given directly. Every interior equation states
//! that consecutive face fluxes are equal, so the discrete flux is constant
//! up to round-off.

use crate::error::{Error, Result};
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WallCondition {
    Value(f64),
    ZeroFlux,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub values: Vec<f64>,
    /// `A phi + G dphi/dy` on each face, wall face first.
    pub face_flux: Vec<f64>,
}

impl ScalarSolution {
    pub fn mean_flux(&self) -> f64 {
        self.face_flux.iter().sum::<f64>() / self.face_flux.len() as f64
    }

    /// Largest deviation of a face flux from the mean, relative to the mean.
    /// Zero for an identically zero flux.
    pub fn flux_spread(&self) -> f64 {
        let mean = self.mean_flux();
        let dev = self
            .face_flux
            .iter()
            .map(|f| (f - mean).abs())
            .fold(0.0, f64::max);
        if dev == 0.0 {
            0.0
        } else {
            dev / mean.abs().max(f64::MIN_POSITIVE)
        }
    }
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

pub fn solve_conservative(
    y: &[f64],
    conductance: &[f64],
    advection: Option<&[f64]>,
    wall: WallCondition,
    bulk: f64,
) -> Result<ScalarSolution> {
    let n = y.len();
    if n < 3 || conductance.len() != n {
        return Err(Error::InvalidArgument(format!(
            "conservative solve needs >= 3 points and one conductance per point ({} vs {})",
            n,
            conductance.len()
        )));
    }
    if let Some(a) = advection {
        if a.len() != n - 1 {
            return Err(Error::InvalidArgument("one advection coefficient per face expected".into()));
        }
    }
    if let Some((i, g)) = conductance.iter().enumerate().find(|(_, g)| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::SingularSystem(format!(
            "non-positive conductance {g} at point {i}"
        )));
    }

    // F_f = west[f] phi_f + east[f] phi_{f+1}
    let (west, east): (Vec<f64>, Vec<f64>) = (0..n - 1)
        .map(|f| {
            let h = y[f + 1] - y[f];
            let g = harmonic_mean(conductance[f], conductance[f + 1]) / h;
            let a = advection.map_or(0.0, |a| 0.5 * a[f]);
            (a - g, a + g)
        })
        .unzip();

    // solve for the deviation from the bulk value so that uniform solutions
    // come out exact
    let offset = |f: usize| (west[f] + east[f]) * bulk;
    let mut m = Tridiagonal::zeros(n);
    let mut rhs = vec![0.0; n];
    match wall {
        WallCondition::Value(v) => {
            m.diag[0] = 1.0;
            rhs[0] = v - bulk;
        }
        WallCondition::ZeroFlux => {
            m.diag[0] = -west[0];
            m.upper[0] = -east[0];
            rhs[0] = offset(0);
        }
    }
    // F_{i-1} - F_i = 0, signed so the diagonal is positive for pure diffusion
    for i in 1..n - 1 {
        m.lower[i] = west[i - 1];
        m.diag[i] = east[i - 1] - west[i];
        m.upper[i] = -east[i];
        rhs[i] = offset(i) - offset(i - 1);
    }
    m.diag[n - 1] = 1.0;

    let dev = m.solve(&rhs)?;
    let face_flux = (0..n - 1)
        .map(|f| west[f] * dev[f] + east[f] * dev[f + 1] + offset(f))
        .collect();
    let values = dev.iter().map(|d| d + bulk).collect();
    Ok(ScalarSolution { values, face_flux })
}
