//! Per-wall-cell subgrid model.
//!
//! The simplified boundary-layer equations are solved on a 1D log mesh
//! between the wall and the centre of the wall-adjacent coarse cell:
//!
//! ```text
//! du+/dy+ = 1 / (mu+ + mu_t+)                         momentum (quadrature)
//! d/dy+ [ K0 T+ + K1 dT+/dy+ ] = 0                     energy
//! d/dy+ [ rho+ (D/nu_w + nu_t+/Sc_t) dX/dy+ ] = 0      species (Fickian)
//! ```
//!
//! Scaling convention, kept in one place ([`Frame`]): `y+ = u_tau y / nu_w`,
//! `T+ = T / T_w`, and `rho+`, `mu+`, `k+`, `c_P+` are the local values
//! divided by their wall values. Species fluxes are scaled by
//! `rho_w u_tau`, so the wall deposition flux is
//! `j_dep = rho_w u_tau rho+ (D/nu_w) dX/dy+ |_wall`.
//!
//! The energy groups are
//!
//! ```text
//! K0 = (k_fc+ + k_t+) d(ln c_P+)/dy+ - Pr_w sum_i j_i+ c_P,i+
//! K1 = k+ + k_t+ + k_fc+,      k_t+ = Pr_w rho+ c_P+ nu_t+ / Pr_t
//! ```
//!
//! with `j_i+` the molecular (diffusiophoretic) flux of species `i` along
//! `+y`. Thermophoresis is not modelled.

mod bvp;
mod mesh;

use serde::{Deserialize, Serialize};

pub use bvp::{harmonic_mean, solve_conservative, ScalarSolution, WallCondition};
pub use mesh::{build_mesh, SubgridMesh};

use crate::error::{Error, Result};
use crate::props::{FluidState, PropertyModel, SpeciesRole};
use crate::wall_law::WallLawParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubgridSettings {
    pub n_nodes: usize,
    /// First node distance as a fraction of the bulk-node distance.
    pub first_node_ratio: f64,
    /// Picard stopping threshold on the max relative profile change.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Under-relaxation applied to T and X from the second iteration on.
    pub relaxation: f64,
    /// Constant concentration-driven conductivity `k_fc+`.
    pub concentration_conductivity: f64,
}

impl Default for SubgridSettings {
    fn default() -> Self {
        Self {
            n_nodes: 300,
            first_node_ratio: 1e-4,
            tolerance: 1e-8,
            max_iterations: 200,
            relaxation: 0.7,
            concentration_conductivity: 0.0,
        }
    }
}

impl SubgridSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_nodes >= 3
            && self.first_node_ratio > 0.0
            && self.first_node_ratio < 1.0
            && self.tolerance > 0.0
            && self.max_iterations >= 2
            && self.relaxation > 0.0
            && self.relaxation <= 1.0
            && self.concentration_conductivity >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid subgrid settings: {self:?}")))
        }
    }
}

/// Wall boundary condition of one species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeciesWallBc {
    /// Interface mass fraction of a depositing species.
    Dirichlet(f64),
    /// Non-depositing species.
    ZeroGradient,
    /// Solvent; takes whatever closes the mass-fraction sum.
    Balance,
}

/// Boundary data for one wall cell.
#[derive(Debug, Clone, PartialEq)]
pub struct WallCellBC {
    pub t_wall: f64,
    /// Temperature and composition at the bulk node.
    pub bulk: FluidState,
    /// Wall-parallel velocity at the bulk node [m/s].
    pub u_bulk: f64,
    pub species_wall: Vec<SpeciesWallBc>,
    /// [W/m2], positive into the fluid.
    pub q_wall: f64,
    pub u_tau: f64,
    /// Wall distance of the bulk node [m].
    pub y_bulk: f64,
}

impl WallCellBC {
    pub fn validate(&self, props: &PropertyModel) -> Result<()> {
        let positive = [
            ("T_wall", self.t_wall),
            ("T_bulk", self.bulk.temperature),
            ("u_bulk", self.u_bulk),
            ("u_tau", self.u_tau),
            ("y_bulk", self.y_bulk),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
        let n = props.species.len();
        if self.species_wall.len() != n || self.bulk.mass_fractions.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} species in wall and bulk conditions"
            )));
        }
        for (s, bc) in props.species.iter().zip(&self.species_wall) {
            let consistent = matches!(
                (s.role, bc),
                (SpeciesRole::Depositing, SpeciesWallBc::Dirichlet(_))
                    | (SpeciesRole::Inert, SpeciesWallBc::ZeroGradient)
                    | (SpeciesRole::Solvent, SpeciesWallBc::Balance)
            );
            if !consistent {
                return Err(Error::InvalidArgument(format!(
                    "wall condition {bc:?} does not match role {:?} of {}",
                    s.role, s.name
                )));
            }
            if let SpeciesWallBc::Dirichlet(x) = bc {
                if !(0.0..=1.0).contains(x) {
                    return Err(Error::InvalidArgument(format!(
                        "interface mass fraction {x} of {} outside [0, 1]",
                        s.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Eddy-viscosity model used on the subgrid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eddy {
    WallLaw(WallLawParams),
    /// No turbulence; linear sublayer everywhere.
    Laminar,
}

impl Eddy {
    fn nu_t_plus(&self, y_plus: f64) -> f64 {
        match self {
            Eddy::WallLaw(p) => p.nu_t_plus_unchecked(y_plus),
            Eddy::Laminar => 0.0,
        }
    }
}

/// Dimensionless description of one subgrid: coordinates, eddy viscosity
/// and property ratios at every point (wall point first).
#[derive(Debug, Clone)]
pub struct Frame {
    pub y: Vec<f64>,
    pub y_plus: Vec<f64>,
    pub nu_t_plus: Vec<f64>,
    pub rho_plus: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub cp_plus: Vec<f64>,
    pub prandtl_wall: f64,
    /// `D / nu_w`
    pub diffusivity_plus: f64,
    pub turbulent_schmidt: f64,
    pub turbulent_prandtl: f64,
    pub concentration_conductivity: f64,
    pub t_wall: f64,
    pub rho_wall: f64,
    pub nu_wall: f64,
    pub u_tau: f64,
    pub eddy: Eddy,
}

impl Frame {
    pub fn new(mesh: &SubgridMesh, bc: &WallCellBC, props: &PropertyModel, eddy: Eddy, kfc: f64) -> Result<Self> {
        let wall = props.eval(bc.t_wall)?;
        let y = mesh.with_wall();
        let y_plus: Vec<f64> = y.iter().map(|v| bc.u_tau * v / wall.nu).collect();
        let nu_t_plus = y_plus.iter().map(|&v| eddy.nu_t_plus(v)).collect();
        let n = y.len();
        Ok(Self {
            y,
            y_plus,
            nu_t_plus,
            rho_plus: vec![1.0; n],
            mu_plus: vec![1.0; n],
            cp_plus: vec![1.0; n],
            prandtl_wall: props.prandtl(wall.mu),
            diffusivity_plus: wall.diffusivity / wall.nu,
            turbulent_schmidt: props.turbulent_schmidt,
            turbulent_prandtl: props.turbulent_prandtl,
            concentration_conductivity: kfc,
            t_wall: bc.t_wall,
            rho_wall: wall.rho,
            nu_wall: wall.nu,
            u_tau: bc.u_tau,
            eddy,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Re-evaluates the property ratios on a temperature profile.
    pub fn set_temperature(&mut self, temperature: &[f64], props: &PropertyModel) -> Result<()> {
        let wall = props.eval(self.t_wall)?;
        for (i, &t) in temperature.iter().enumerate() {
            let p = props.eval(t)?;
            self.rho_plus[i] = p.rho / wall.rho;
            self.mu_plus[i] = p.mu / wall.mu;
        }
        // c_P is a constant of the property model
        self.cp_plus.iter_mut().for_each(|c| *c = 1.0);
        Ok(())
    }

    /// Species conductance `rho+ (D/nu_w + nu_t+/Sc_t)` at every point.
    pub fn species_conductance(&self) -> Vec<f64> {
        self.rho_plus
            .iter()
            .zip(&self.nu_t_plus)
            .map(|(r, nt)| r * (self.diffusivity_plus + nt / self.turbulent_schmidt))
            .collect()
    }

    /// Molecular flux of one species along `+y` on each face,
    /// `-rho+ (D/nu_w) dX/dy+`.
    pub fn molecular_flux(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len() - 1)
            .map(|f| {
                let rho = 0.5 * (self.rho_plus[f] + self.rho_plus[f + 1]);
                let grad = (x[f + 1] - x[f]) / (self.y_plus[f + 1] - self.y_plus[f]);
                -rho * self.diffusivity_plus * grad
            })
            .collect()
    }

    fn k_turbulent(&self, i: usize) -> f64 {
        self.prandtl_wall * self.rho_plus[i] * self.cp_plus[i] * self.nu_t_plus[i] / self.turbulent_prandtl
    }
}

/// Dimensionless groups of the energy equation.
#[derive(Debug, Clone, PartialEq)]
pub struct DimlessGroups {
    pub prandtl_wall: f64,
    /// On faces.
    pub k0_plus: Vec<f64>,
    /// On points.
    pub k1_plus: Vec<f64>,
    pub k_fc_plus: Vec<f64>,
    pub cp_plus: Vec<f64>,
    /// Molecular flux of each species along `+y`, on faces.
    pub j_plus: Vec<Vec<f64>>,
}

/// Assembles `K0`/`K1` from the frame and the species molecular fluxes.
/// `species_cp_plus[i]` is `c_P,i / c_P,w`.
pub fn dimless_groups(frame: &Frame, j_plus: Vec<Vec<f64>>, species_cp_plus: &[f64]) -> DimlessGroups {
    let n = frame.len();
    let kfc = frame.concentration_conductivity;
    let k1_plus = (0..n).map(|i| 1.0 + frame.k_turbulent(i) + kfc).collect();
    let k0_plus = (0..n - 1)
        .map(|f| {
            let kt = 0.5 * (frame.k_turbulent(f) + frame.k_turbulent(f + 1));
            let dln_cp = (frame.cp_plus[f + 1].ln() - frame.cp_plus[f].ln())
                / (frame.y_plus[f + 1] - frame.y_plus[f]);
            let enthalpy: f64 = j_plus.iter().zip(species_cp_plus).map(|(j, cp)| j[f] * cp).sum();
            (kfc + kt) * dln_cp - frame.prandtl_wall * enthalpy
        })
        .collect();
    DimlessGroups {
        prandtl_wall: frame.prandtl_wall,
        k0_plus,
        k1_plus,
        k_fc_plus: vec![kfc; n],
        cp_plus: frame.cp_plus.clone(),
        j_plus,
    }
}

/// `u+` by quadrature of `1/(mu+ + rho+ nu_t+)` from the wall. Properties
/// are linear between points; the eddy viscosity is evaluated exactly at
/// the three Gauss points of every segment.
pub fn solve_momentum(frame: &Frame) -> Vec<f64> {
    const GAUSS: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    let mut u = Vec::with_capacity(frame.len());
    u.push(0.0);
    for f in 0..frame.len() - 1 {
        let (y0, y1) = (frame.y_plus[f], frame.y_plus[f + 1]);
        let half = 0.5 * (y1 - y0);
        let mid = 0.5 * (y1 + y0);
        let seg: f64 = GAUSS
            .iter()
            .map(|&(xi, w)| {
                let s = 0.5 * (1.0 + xi);
                let mu = frame.mu_plus[f] + s * (frame.mu_plus[f + 1] - frame.mu_plus[f]);
                let rho = frame.rho_plus[f] + s * (frame.rho_plus[f + 1] - frame.rho_plus[f]);
                let nu_t = frame.eddy.nu_t_plus(mid + half * xi);
                w / (mu + rho * nu_t)
            })
            .sum::<f64>()
            * half;
        u.push(u[f] + seg);
    }
    u
}

/// Energy solve in `T+ = T/T_w`; returns dimensional temperatures and the
/// dimensionless face flux `K0 T+ + K1 dT+/dy+`.
pub fn solve_energy(frame: &Frame, groups: &DimlessGroups, t_wall: f64, t_bulk: f64) -> Result<ScalarSolution> {
    if let Some(k) = groups.k1_plus.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::SingularSystem(format!("K1+ = {k} is not positive")));
    }
    let scale = frame.t_wall;
    let mut s = solve_conservative(
        &frame.y_plus,
        &groups.k1_plus,
        Some(&groups.k0_plus),
        WallCondition::Value(t_wall / scale),
        t_bulk / scale,
    )?;
    s.values.iter_mut().for_each(|t| *t *= scale);
    Ok(s)
}

/// Species solve for one non-solvent species. The face flux is
/// `rho+ (D/nu_w + nu_t+/Sc_t) dX/dy+`, i.e. the dimensionless total flux
/// towards the wall.
pub fn solve_species(frame: &Frame, wall: SpeciesWallBc, x_bulk: f64) -> Result<ScalarSolution> {
    let condition = match wall {
        SpeciesWallBc::Dirichlet(v) => WallCondition::Value(v),
        SpeciesWallBc::ZeroGradient => WallCondition::ZeroFlux,
        SpeciesWallBc::Balance => {
            return Err(Error::InvalidArgument("the solvent is not solved for".into()));
        }
    };
    let conductance = frame.species_conductance();
    if let Some(g) = conductance.iter().find(|g| !(**g > 0.0)) {
        return Err(Error::SingularSystem(format!("effective diffusivity {g} is not positive")));
    }
    solve_conservative(&frame.y_plus, &conductance, None, condition, x_bulk)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// Max relative profile change of the last Picard iteration.
    pub picard_change: f64,
    /// Worst relative face-flux spread over the species solves.
    pub species_flux_spread: f64,
    pub energy_flux_spread: f64,
    /// `u+(y_bulk) u_tau / u_bulk - 1`.
    pub momentum_mismatch: f64,
}

/// Result of one wall-cell solve. Profiles include the wall point.
#[derive(Debug, Clone, PartialEq)]
pub struct DepositionResult {
    /// Per species [kg/(m2 s)], positive towards the wall. Zero for
    /// zero-gradient species and the solvent.
    pub j_dep: Vec<f64>,
    pub y: Vec<f64>,
    pub y_plus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub temperature: Vec<f64>,
    /// One profile per species.
    pub mass_fractions: Vec<Vec<f64>>,
    /// Wall heat flux implied by the temperature profile [W/m2].
    pub wall_heat_flux: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub history: Vec<f64>,
}

/// Solves one wall cell with the wall-law eddy viscosity.
pub fn solve_wall_cell(
    bc: &WallCellBC,
    props: &PropertyModel,
    wall_law: &WallLawParams,
    settings: &SubgridSettings,
) -> Result<DepositionResult> {
    solve_wall_cell_with(bc, props, Eddy::WallLaw(*wall_law), settings)
}

pub fn solve_wall_cell_with(
    bc: &WallCellBC,
    props: &PropertyModel,
    eddy: Eddy,
    settings: &SubgridSettings,
) -> Result<DepositionResult> {
    settings.validate()?;
    bc.validate(props)?;
    let mesh = build_mesh(bc.y_bulk, settings.n_nodes, settings.first_node_ratio)?;
    let mut frame = Frame::new(&mesh, bc, props, eddy, settings.concentration_conductivity)?;
    let n = frame.len();
    let n_species = props.species.len();
    let solvent = props.solvent_index();
    let cp_wall = props.heat_capacity;
    let species_cp: Vec<f64> = (0..n_species).map(|i| props.species_heat_capacity(i) / cp_wall).collect();

    let y_end = frame.y_plus[n - 1];
    let lerp = |a: f64, b: f64| -> Vec<f64> { frame.y_plus.iter().map(|y| a + (b - a) * y / y_end).collect() };
    let mut temperature = lerp(bc.t_wall, bc.bulk.temperature);
    let mut fractions: Vec<Vec<f64>> = (0..n_species)
        .map(|i| {
            let xb = bc.bulk.mass_fractions[i];
            match bc.species_wall[i] {
                SpeciesWallBc::Dirichlet(xw) => lerp(xw, xb),
                _ => vec![xb; n],
            }
        })
        .collect();

    let mut history = Vec::new();
    for iteration in 1..=settings.max_iterations {
        frame.set_temperature(&temperature, props)?;

        let mut species = Vec::with_capacity(n_species);
        let mut new_fractions = vec![Vec::new(); n_species];
        let mut j_plus = vec![vec![0.0; n - 1]; n_species];
        for i in (0..n_species).filter(|&i| i != solvent) {
            let s = solve_species(&frame, bc.species_wall[i], bc.bulk.mass_fractions[i])?;
            j_plus[i] = frame.molecular_flux(&s.values);
            new_fractions[i] = s.values.clone();
            species.push((i, s));
        }
        new_fractions[solvent] = (0..n)
            .map(|k| 1.0 - species.iter().map(|(_, s)| s.values[k]).sum::<f64>())
            .collect();
        j_plus[solvent] = (0..n - 1)
            .map(|f| -species.iter().map(|(i, _)| j_plus[*i][f]).sum::<f64>())
            .collect();

        let groups = dimless_groups(&frame, j_plus, &species_cp);
        let energy = solve_energy(&frame, &groups, bc.t_wall, bc.bulk.temperature)?;

        let change = profile_change(&temperature, &energy.values, &fractions, &new_fractions);
        history.push(change);

        if iteration == 1 {
            temperature = energy.values.clone();
            fractions = new_fractions;
        } else {
            let w = settings.relaxation;
            relax(&mut temperature, &energy.values, w);
            for (old, new) in fractions.iter_mut().zip(&new_fractions) {
                relax(old, new, w);
            }
        }

        if iteration >= 2 && change < settings.tolerance {
            // report the last solve, which satisfies the discrete equations exactly
            let u_plus = solve_momentum(&frame);
            let mut j_dep = vec![0.0; n_species];
            let mut species_spread: f64 = 0.0;
            for (i, s) in &species {
                species_spread = species_spread.max(s.flux_spread());
                if matches!(bc.species_wall[*i], SpeciesWallBc::Dirichlet(_)) {
                    j_dep[*i] = frame.rho_wall * frame.u_tau * s.mean_flux();
                }
            }
            let heat_scale = props.conductivity * frame.t_wall * frame.u_tau / frame.nu_wall;
            let residuals = Residuals {
                picard_change: change,
                species_flux_spread: species_spread,
                energy_flux_spread: energy.flux_spread(),
                momentum_mismatch: u_plus[n - 1] * bc.u_tau / bc.u_bulk - 1.0,
            };
            let mut mass_fractions = vec![Vec::new(); n_species];
            for (i, s) in species {
                mass_fractions[i] = s.values;
            }
            mass_fractions[solvent] = (0..n)
                .map(|k| {
                    1.0 - mass_fractions
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != solvent)
                        .map(|(_, x)| x[k])
                        .sum::<f64>()
                })
                .collect();
            return Ok(DepositionResult {
                j_dep,
                y: frame.y.clone(),
                y_plus: frame.y_plus.clone(),
                u_plus,
                wall_heat_flux: -energy.mean_flux() * heat_scale,
                temperature: energy.values,
                mass_fractions,
                iterations: iteration,
                residuals,
                history,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: settings.max_iterations,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

fn relax(old: &mut [f64], new: &[f64], w: f64) {
    for (o, n) in old.iter_mut().zip(new) {
        *o += w * (n - *o);
    }
}

fn profile_change(t_old: &[f64], t_new: &[f64], x_old: &[Vec<f64>], x_new: &[Vec<f64>]) -> f64 {
    let t = t_old
        .iter()
        .zip(t_new)
        .map(|(a, b)| (a - b).abs() / a.abs())
        .fold(0.0, f64::max);
    x_old.iter().zip(x_new).fold(t, |acc, (a, b)| {
        let scale = a.iter().chain(b.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return acc;
        }
        a.iter().zip(b).fold(acc, |m, (p, q)| m.max((p - q).abs() / scale))
    })
}
