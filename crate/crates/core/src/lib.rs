//! Discrete Lagrangian mechanics: variational integrators, discrete and
//! continuous Helmholtz conditions, nonholonomic discretisations and
//! conserved quantities.

pub mod bridge;
pub mod error;
pub mod helmholtz;
pub mod invariants;
pub mod lagrangian;
pub mod nonholonomic;
pub mod numkit;
pub mod sode;
pub mod systems;

pub use error::{Error, Result};
pub use lagrangian::{DiscreteLagrangian, PairFunction, Simulation, Trajectory};
pub use nonholonomic::{DiscretizationRule, NonholonomicSystem};
pub use numkit::{DiffConfig, Matrix, NewtonConfig, Vector};
pub use sode::{ExplicitSOdE, ImplicitSOdE};
pub use systems::{catalog, catalog_with, SystemEntry, SystemParams};
