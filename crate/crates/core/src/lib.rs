//! Axisymmetric acoustic scattering by penetrable bodies, solved through the
//! modal Lippmann-Schwinger volume integral equation.
//!
//! The angular part of the operator is applied with fast Legendre transforms
//! (`flt`), the radial part with precomputed moment tables and sweep
//! recurrences (`radialkernel`), and the linear system is solved matrix-free
//! with restarted GMRES (`operator`). The exact series solution for the
//! homogeneous sphere (`mie`) serves as the reference for error measurement.

pub mod besselmod;
pub mod dd;
pub mod error;
pub mod fct;
pub mod flt;
pub mod gmres;
pub mod mie;
pub mod operator;
pub mod orthopoly;
pub mod quad;
pub mod radialkernel;
pub mod scatterers;

pub use error::{Error, Result};
pub use flt::{FltPlan, TablePrecision};
pub use operator::{solve_scattering, ScatteringSolution, SolverConfig};
pub use radialkernel::{ModalField, RadialGrid};
pub use scatterers::Scatterer;
