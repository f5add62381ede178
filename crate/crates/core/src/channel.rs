//! One-dimensional marching surrogate of the heated parallel-plate channel.
//!
//! Each axial station gets its bulk temperature from the global energy
//! balance, a friction velocity from the wall law (the mean of the wall-law
//! profile over the half gap equals the inlet velocity), the wall-parallel
//! velocity at the first cell centre, and a wall temperature from the
//! integrated thermal wall law with the same eddy viscosity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interface::{interface_mass_fraction, VelocityPolynomials};
use crate::props::{FluidState, PropertyModel, SpeciesRole};
use crate::roots::{bracketed_root, RootOptions};
use crate::subgrid::{SpeciesWallBc, WallCellBC};
use crate::wall_law::{integrated_u_plus, invert_friction_velocity, thermal_resistance, WallLawParams, U_TAU_BRACKET};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    /// Gap width [m].
    pub gap: f64,
    /// Heated length [m].
    pub length: f64,
    pub n_axial: usize,
    pub n_cross: usize,
    /// [m/s]
    pub u_in: f64,
    /// [K]
    pub t_in: f64,
    /// Wall heat flux [W/m2].
    pub q_wall: f64,
    /// Inlet mass fraction of the depositing species.
    pub x_in: f64,
    pub heated_walls: u32,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            gap: 0.0281,
            length: 0.2,
            n_axial: 20,
            n_cross: 6,
            u_in: 0.2,
            t_in: 303.0,
            q_wall: 52_500.0,
            x_in: 4.197e-4,
            heated_walls: 2,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gap > 0.0 && self.length > 0.0) {
            return bad(format!("gap and length must be positive ({}, {})", self.gap, self.length));
        }
        if self.n_axial < 1 || self.n_cross < 1 {
            return bad("n_axial and n_cross must be at least 1".into());
        }
        if !(self.u_in > 0.0) {
            return bad(format!("u_in must be positive, got {}", self.u_in));
        }
        if !(self.t_in > 0.0) {
            return bad(format!("t_in must be positive, got {}", self.t_in));
        }
        if !(self.q_wall >= 0.0) {
            return bad(format!("q_wall must be non-negative, got {}", self.q_wall));
        }
        if !(0.0..1.0).contains(&self.x_in) {
            return bad(format!("x_in must lie in [0, 1), got {}", self.x_in));
        }
        if !matches!(self.heated_walls, 1 | 2) {
            return bad(format!("heated_walls must be 1 or 2, got {}", self.heated_walls));
        }
        Ok(())
    }

    /// Wall distance of the first cell centre.
    pub fn y_first_cell(&self) -> f64 {
        self.gap / (2.0 * self.n_cross as f64)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_axial as f64
    }
}

/// Flow state at one axial station (cell centre).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station {
    pub x: f64,
    pub dx: f64,
    /// Velocity at the first cell centre [m/s].
    pub u_bulk: f64,
    pub t_bulk: f64,
    pub t_wall: f64,
    pub u_tau: f64,
    /// Wall distance of the first cell centre [m].
    pub y_bulk: f64,
    /// `u_tau y_bulk / nu_bulk`
    pub y_plus: f64,
    pub rho_bulk: f64,
    pub mu_bulk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenFlowField {
    pub config: ChannelConfig,
    pub stations: Vec<Station>,
}

impl FrozenFlowField {
    /// Bulk temperature at axial position `x` from the energy balance.
    pub fn bulk_temperature_at(&self, x: f64, rho_in: f64, cp: f64) -> f64 {
        let c = &self.config;
        c.t_in + c.q_wall * c.heated_walls as f64 * x / (rho_in * c.u_in * c.gap * cp)
    }

    /// Heated wall area per station and per heated wall, per unit depth.
    pub fn cell_areas(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.dx).collect()
    }
}

/// Friction velocity for which the wall-law profile averaged over the half
/// gap equals `u_mean`.
pub fn friction_velocity_from_mean(u_mean: f64, half_gap: f64, nu: f64, p: &WallLawParams) -> Result<f64> {
    if !(u_mean > 0.0 && half_gap > 0.0 && nu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean-velocity inversion needs positive inputs: u = {u_mean}, h = {half_gap}, nu = {nu}"
        )));
    }
    let residual = |s: f64| {
        let u_tau = s.exp();
        let y_plus = u_tau * half_gap / nu;
        let mean_plus = integrated_u_plus(y_plus, p).map_or(f64::NAN, |i| i / y_plus);
        (u_mean / u_tau).ln() - mean_plus.ln()
    };
    let (lo, hi) = U_TAU_BRACKET;
    let opts = RootOptions {
        f_tol: 1e-13,
        x_tol: 1e-15,
        max_iterations: 300,
    };
    let s = bracketed_root(residual, lo.ln(), hi.ln(), opts).map_err(|_| Error::NoBracket { lo, hi })?;
    Ok(s.exp())
}

/// Marches the channel and records every station.
pub fn march_channel(cfg: &ChannelConfig, props: &PropertyModel, wall_law: &WallLawParams) -> Result<FrozenFlowField> {
    cfg.validate()?;
    wall_law.validate()?;
    let rho_in = props.eval(cfg.t_in)?.rho;
    let cp = props.heat_capacity;
    let dx = cfg.dx();
    let y_c = cfg.y_first_cell();
    let mut field = FrozenFlowField {
        config: cfg.clone(),
        stations: Vec::with_capacity(cfg.n_axial),
    };
    for i in 0..cfg.n_axial {
        let x = (i as f64 + 0.5) * dx;
        let t_bulk = field.bulk_temperature_at(x, rho_in, cp);
        let bulk = props.eval(t_bulk)?;
        let u_tau_mean = friction_velocity_from_mean(cfg.u_in, 0.5 * cfg.gap, bulk.nu, wall_law)?;
        let u_c = u_tau_mean * wall_law.u_plus_unchecked(u_tau_mean * y_c / bulk.nu);
        let u_tau = invert_friction_velocity(u_c, y_c, bulk.nu, wall_law)?;
        let y_plus = u_tau * y_c / bulk.nu;
        let resistance = thermal_resistance(y_plus, props.prandtl(bulk.mu), props.turbulent_prandtl, wall_law)?;
        let t_wall = t_bulk + cfg.q_wall * resistance / (bulk.rho * cp * u_tau);
        field.stations.push(Station {
            x,
            dx,
            u_bulk: u_c,
            t_bulk,
            t_wall,
            u_tau,
            y_bulk: y_c,
            y_plus,
            rho_bulk: bulk.rho,
            mu_bulk: bulk.mu,
        });
    }
    Ok(field)
}

/// Interface model inputs for [`assemble_wall_cells`].
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceModel {
    pub polynomials: VelocityPolynomials,
    /// Subtracted from the wall temperature before the logistic [K].
    pub wall_temperature_offset: f64,
}

/// Bulk composition of the channel: inlet fraction for the depositing
/// species, none of any inert species, the rest solvent.
pub fn inlet_composition(props: &PropertyModel, x_in: f64) -> Vec<f64> {
    props
        .species
        .iter()
        .map(|s| match s.role {
            SpeciesRole::Depositing => x_in,
            SpeciesRole::Inert => 0.0,
            SpeciesRole::Solvent => 1.0 - x_in,
        })
        .collect()
}

/// One wall cell per station; both heated walls see the same state.
pub fn assemble_wall_cells(
    field: &FrozenFlowField,
    interface: &InterfaceModel,
    props: &PropertyModel,
) -> Result<Vec<WallCellBC>> {
    let cfg = &field.config;
    let fractions = inlet_composition(props, cfg.x_in);
    field
        .stations
        .iter()
        .map(|s| {
            let x_sat = props.x_sat(s.t_wall)?;
            let x_wall = interface_mass_fraction(
                s.t_wall,
                cfg.u_in,
                &interface.polynomials,
                x_sat,
                interface.wall_temperature_offset,
            )?;
            let species_wall = props
                .species
                .iter()
                .map(|sp| match sp.role {
                    SpeciesRole::Depositing => SpeciesWallBc::Dirichlet(x_wall),
                    SpeciesRole::Inert => SpeciesWallBc::ZeroGradient,
                    SpeciesRole::Solvent => SpeciesWallBc::Balance,
                })
                .collect();
            Ok(WallCellBC {
                t_wall: s.t_wall,
                bulk: FluidState::new(s.t_bulk, fractions.clone())?,
                u_bulk: s.u_bulk,
                species_wall,
                q_wall: cfg.q_wall,
                u_tau: s.u_tau,
                y_bulk: s.y_bulk,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wall_law::u_plus;
    use approx::assert_relative_eq;

    fn p() -> WallLawParams {
        WallLawParams::default()
    }

    #[test]
    fn adiabatic_channel_is_isothermal() {
        let cfg = ChannelConfig {
            q_wall: 0.0,
            ..Default::default()
        };
        let f = march_channel(&cfg, &PropertyModel::water_like(), &p()).unwrap();
        assert_eq!(f.stations.len(), 20);
        for s in &f.stations {
            assert_eq!(s.t_bulk, 303.0);
            assert_eq!(s.t_wall, 303.0);
        }
    }

    #[test]
    fn doubling_velocity_halves_bulk_rise() {
        let props = PropertyModel::water_like();
        let slow = march_channel(&ChannelConfig::default(), &props, &p()).unwrap();
        let fast = march_channel(
            &ChannelConfig {
                u_in: 0.4,
                ..Default::default()
            },
            &props,
            &p(),
        )
        .unwrap();
        for (a, b) in slow.stations.iter().zip(&fast.stations) {
            assert_relative_eq!(b.t_bulk - 303.0, 0.5 * (a.t_bulk - 303.0), max_relative = 1e-9);
        }
    }

    #[test]
    fn energy_balance_closes() {
        let props = PropertyModel::water_like();
        let cfg = ChannelConfig::default();
        let f = march_channel(&cfg, &props, &p()).unwrap();
        let rho_in = props.eval(cfg.t_in).unwrap().rho;
        let cp = props.heat_capacity;
        let absorbed: f64 = f
            .stations
            .iter()
            .map(|s| {
                let rise = f.bulk_temperature_at(s.x + 0.5 * s.dx, rho_in, cp)
                    - f.bulk_temperature_at(s.x - 0.5 * s.dx, rho_in, cp);
                rho_in * cfg.u_in * cfg.gap * cp * rise
            })
            .sum();
        let supplied = cfg.q_wall * cfg.heated_walls as f64 * cfg.length;
        assert_relative_eq!(absorbed, supplied, max_relative = 1e-10);
    }

    #[test]
    fn wall_hotter_than_bulk_and_friction_smooth() {
        let props = PropertyModel::water_like();
        let f = march_channel(&ChannelConfig::default(), &props, &p()).unwrap();
        for w in f.stations.windows(2) {
            assert!((w[1].u_tau / w[0].u_tau - 1.0).abs() < 0.05);
            assert!(w[1].t_wall > w[0].t_wall);
        }
        assert!(f.stations.iter().all(|s| s.t_wall > s.t_bulk));
    }

    #[test]
    fn friction_velocity_constant_with_constant_properties() {
        let props = PropertyModel::constant(1000.0, 8e-4, 3.64e-5);
        let f = march_channel(&ChannelConfig::default(), &props, &p()).unwrap();
        let u0 = f.stations[0].u_tau;
        assert!(f.stations.iter().all(|s| s.u_tau == u0));
    }

    #[test]
    fn mean_velocity_inversion_round_trip() {
        let nu = 8e-7;
        let h = 0.01405;
        let u_tau = friction_velocity_from_mean(0.3, h, nu, &p()).unwrap();
        // mean of u+ by trapezoid over the half gap
        let n = 200_000;
        let yh = u_tau * h / nu;
        let mean: f64 = (0..n)
            .map(|k| {
                let (a, b) = (yh * k as f64 / n as f64, yh * (k + 1) as f64 / n as f64);
                0.5 * (u_plus(a, &p()).unwrap() + u_plus(b, &p()).unwrap()) * (b - a)
            })
            .sum::<f64>()
            / yh;
        assert_relative_eq!(u_tau * mean, 0.3, max_relative = 1e-8);
    }

    #[test]
    fn wall_cells_follow_interface_regimes() {
        let props = PropertyModel::water_like();
        let cfg = ChannelConfig {
            u_in: 0.333,
            ..Default::default()
        };
        let f = march_channel(&cfg, &props, &p()).unwrap();
        let t0 = f.stations[0].t_wall;
        // plateau regime: threshold far above the wall temperature
        let cold = InterfaceModel {
            polynomials: VelocityPolynomials {
                a_coeffs: [4.1e-4, 0.0, 0.0, 0.0],
                b_coeffs: [t0 + 60.0, 0.0, 0.0],
                c_coeffs: [80.0, 0.0, 0.0],
                validity: [0.2, 0.4],
            },
            wall_temperature_offset: 6.5,
        };
        let cells = assemble_wall_cells(&f, &cold, &props).unwrap();
        assert_eq!(cells.len(), f.stations.len());
        for c in &cells {
            let SpeciesWallBc::Dirichlet(x) = c.species_wall[0] else { panic!() };
            assert_relative_eq!(x, 4.1e-4, max_relative = 1e-3);
        }
        // clamp regime: threshold far below
        let hot = InterfaceModel {
            polynomials: VelocityPolynomials {
                b_coeffs: [t0 - 60.0, 0.0, 0.0],
                ..cold.polynomials.clone()
            },
            ..cold
        };
        let cells = assemble_wall_cells(&f, &hot, &props).unwrap();
        for (c, s) in cells.iter().zip(&f.stations) {
            assert_eq!(c.species_wall[0], SpeciesWallBc::Dirichlet(props.x_sat(s.t_wall).unwrap()));
        }
    }
}
