//! Subgrid fouling wall function for crystallization fouling in heated
//! channels.
//!
//! The crate resolves the near-wall momentum, energy and species balances on
//! a logarithmic 1D subgrid for every wall cell of a coarse channel model and
//! returns the deposition mass flux of the depositing salt. A two-step
//! kinetics model serves as a cross-check and the Fickian diffusivity can be
//! calibrated against a target deposition rate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod channel;
pub mod error;
pub mod frozen;
pub mod interface;
pub mod pipeline;
pub mod props;
pub mod roots;
pub mod scenario;
pub mod subgrid;
pub mod tridiag;
pub mod two_step;
pub mod wall_law;

pub use error::{Error, ErrorKind, Result};
pub use props::{FluidState, PropertyModel};
pub use subgrid::{solve_wall_cell, DepositionResult, SubgridSettings, WallCellBC};
pub use wall_law::WallLawParams;
