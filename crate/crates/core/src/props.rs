//! Temperature-dependent properties of the dilute salt/water pseudo-binary.
//!
//! Density, viscosity and saturation mass fraction are polynomials in
//! `T - t_ref`; conductivity, heat capacity and the Fickian diffusivity are
//! constants. Pressure dependence is ignored (incompressible liquid).
//! Evaluating outside `[t_min, t_max]` is an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the mass-fraction sum accepted by the conversions.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Molar mass of CaCO3 [kg/mol].
pub const MOLAR_MASS_CACO3: f64 = 100.09e-3;
/// Molar mass of H2O [kg/mol].
pub const MOLAR_MASS_WATER: f64 = 18.015e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    /// Coefficients in ascending order of `(T - t_ref)`.
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub t_ref: f64,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>, t_ref: f64) -> Self {
        Self { coeffs, t_ref }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            coeffs: vec![value],
            t_ref: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = t - self.t_ref;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesRole {
    /// Deposits at the wall; Dirichlet interface mass fraction.
    Depositing,
    /// Does not deposit; zero-gradient at the wall.
    Inert,
    /// Carrier liquid; closes the mass-fraction sum.
    Solvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// [kg/mol]
    pub molar_mass: f64,
    pub role: SpeciesRole,
    /// Species specific heat [J/(kg K)]; `None` means the mixture value.
    pub heat_capacity: Option<f64>,
}

/// Property correlations for the model fluid.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyModel {
    pub species: Vec<Species>,
    /// [kg/m3]
    pub density: Polynomial,
    /// [Pa s]
    pub viscosity: Polynomial,
    /// Saturation mass fraction of the depositing species [kg/kg].
    pub saturation: Polynomial,
    /// Fickian diffusivity of the depositing species [m2/s].
    pub diffusivity: f64,
    /// [W/(m K)]
    pub conductivity: f64,
    /// [J/(kg K)]
    pub heat_capacity: f64,
    pub turbulent_schmidt: f64,
    pub turbulent_prandtl: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// Property values at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Properties {
    pub rho: f64,
    pub mu: f64,
    pub nu: f64,
    pub diffusivity: f64,
    pub x_sat: f64,
}

impl PropertyModel {
    /// Water-like CaCO3/H2O defaults.
    ///
    /// NOT the correlations used for the published results: density and
    /// viscosity are least-squares fits to tabulated pure-water data over
    /// 10..100 degC, and the saturation curve is an illustrative linear
    /// inverse-solubility line. Thermal constants and the diffusivity are
    /// the published model-fluid values.
    pub fn water_like() -> Self {
        Self {
            species: vec![
                Species {
                    name: "CaCO3".into(),
                    molar_mass: MOLAR_MASS_CACO3,
                    role: SpeciesRole::Depositing,
                    heat_capacity: None,
                },
                Species {
                    name: "H2O".into(),
                    molar_mass: MOLAR_MASS_WATER,
                    role: SpeciesRole::Solvent,
                    heat_capacity: None,
                },
            ],
            density: Polynomial::new(
                vec![1000.3536666666683, -7.898018648113044e-3, -5.38432400932243e-3, 1.2668997668988799e-5],
                273.15,
            ),
            viscosity: Polynomial::new(
                vec![
                    1.7227999999999979e-3,
                    -4.901597319347303e-5,
                    7.783610139860098e-7,
                    -6.435256410256346e-9,
                    2.1133449883449515e-11,
                ],
                273.15,
            ),
            saturation: Polynomial::new(vec![2.0e-5, -1.0e-7], 303.0),
            diffusivity: 3.64e-5,
            conductivity: 0.6637,
            heat_capacity: 4182.0,
            turbulent_schmidt: 1.0,
            turbulent_prandtl: 0.85,
            t_min: 283.15,
            t_max: 373.15,
        }
    }

    /// Constant density and viscosity, zero saturation; handy for isolating
    /// the transport equations.
    pub fn constant(rho: f64, mu: f64, diffusivity: f64) -> Self {
        Self {
            density: Polynomial::constant(rho),
            viscosity: Polynomial::constant(mu),
            saturation: Polynomial::constant(0.0),
            diffusivity,
            t_min: 1.0,
            t_max: 1.0e4,
            ..Self::water_like()
        }
    }

    pub fn with_diffusivity(&self, diffusivity: f64) -> Self {
        Self {
            diffusivity,
            ..self.clone()
        }
    }

    /// Checks the structural invariants and samples the correlations over
    /// the validity interval.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return bad(format!(
                "property validity interval [{}, {}] is empty or non-positive",
                self.t_min, self.t_max
            ));
        }
        for (name, v) in [
            ("diffusivity", self.diffusivity),
            ("conductivity", self.conductivity),
            ("heat_capacity", self.heat_capacity),
            ("turbulent_schmidt", self.turbulent_schmidt),
            ("turbulent_prandtl", self.turbulent_prandtl),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let count = |role| self.species.iter().filter(|s| s.role == role).count();
        if count(SpeciesRole::Depositing) != 1 || count(SpeciesRole::Solvent) != 1 {
            return bad("exactly one depositing and one solvent species are required".into());
        }
        for s in &self.species {
            if !(s.molar_mass > 0.0) {
                return bad(format!("molar mass of {} must be positive", s.name));
            }
            if let Some(cp) = s.heat_capacity {
                if !(cp > 0.0) {
                    return bad(format!("heat capacity of {} must be positive", s.name));
                }
            }
        }
        const SAMPLES: usize = 256;
        for k in 0..=SAMPLES {
            let t = self.t_min + (self.t_max - self.t_min) * k as f64 / SAMPLES as f64;
            let (rho, mu, xs) = (
                self.density.eval(t),
                self.viscosity.eval(t),
                self.saturation.eval(t),
            );
            if !(rho > 0.0 && mu > 0.0 && xs >= 0.0) {
                return bad(format!(
                    "correlations invalid at T = {t} K: rho = {rho}, mu = {mu}, X_sat = {xs}"
                ));
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Properties> {
        if !(t >= self.t_min && t <= self.t_max) {
            return Err(Error::OutOfRange {
                quantity: "temperature",
                value: t,
                lo: self.t_min,
                hi: self.t_max,
            });
        }
        let rho = self.density.eval(t);
        let mu = self.viscosity.eval(t);
        Ok(Properties {
            rho,
            mu,
            nu: mu / rho,
            diffusivity: self.diffusivity,
            x_sat: self.saturation.eval(t),
        })
    }

    pub fn x_sat(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|p| p.x_sat)
    }

    pub fn depositing_index(&self) -> usize {
        self.species
            .iter()
            .position(|s| s.role == SpeciesRole::Depositing)
            .expect("validated model has a depositing species")
    }

    pub fn solvent_index(&self) -> usize {
        self.species
            .iter()
            .position(|s| s.role == SpeciesRole::Solvent)
            .expect("validated model has a solvent")
    }

    pub fn species_heat_capacity(&self, i: usize) -> f64 {
        self.species[i].heat_capacity.unwrap_or(self.heat_capacity)
    }

    pub fn molar_masses(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.molar_mass).collect()
    }

    pub fn prandtl(&self, mu: f64) -> f64 {
        mu * self.heat_capacity / self.conductivity
    }
}

/// Thermodynamic state at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub temperature: f64,
    pub mass_fractions: Vec<f64>,
    pub mole_fractions: Option<Vec<f64>>,
}

impl FluidState {
    pub fn new(temperature: f64, mass_fractions: Vec<f64>) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        check_mass_fractions(&mass_fractions, 1e-12)?;
        Ok(Self {
            temperature,
            mass_fractions,
            mole_fractions: None,
        })
    }

    pub fn with_mole_fractions(mut self, molar_masses: &[f64]) -> Result<Self> {
        self.mole_fractions = Some(mass_to_mole_fractions(&self.mass_fractions, molar_masses)?);
        Ok(self)
    }
}

fn check_mass_fractions(x: &[f64], tol: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInput("mass fractions"));
    }
    if let Some(&v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!("mass fraction {v} outside [0, 1]")));
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NonNormalized { sum });
    }
    Ok(())
}

/// `z_i = (X_i/M_i) / sum_j (X_j/M_j)`.
pub fn mass_to_mole_fractions(x: &[f64], molar_masses: &[f64]) -> Result<Vec<f64>> {
    convert_fractions(x, molar_masses, |v, m| v / m)
}

/// Inverse of [`mass_to_mole_fractions`]: `X_i = z_i M_i / sum_j z_j M_j`.
pub fn mole_to_mass_fractions(z: &[f64], molar_masses: &[f64]) -> Result<Vec<f64>> {
    convert_fractions(z, molar_masses, |v, m| v * m)
}

fn convert_fractions(
    f: &[f64],
    molar_masses: &[f64],
    weight: impl Fn(f64, f64) -> f64,
) -> Result<Vec<f64>> {
    if f.len() != molar_masses.len() {
        return Err(Error::InvalidArgument(format!(
            "{} fractions but {} molar masses",
            f.len(),
            molar_masses.len()
        )));
    }
    if let Some(&m) = molar_masses.iter().find(|m| !(**m > 0.0)) {
        return Err(Error::InvalidArgument(format!("molar mass must be positive, got {m}")));
    }
    check_mass_fractions(f, NORMALIZATION_TOL)?;
    let w: Vec<f64> = f.iter().zip(molar_masses).map(|(&v, &m)| weight(v, m)).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}
