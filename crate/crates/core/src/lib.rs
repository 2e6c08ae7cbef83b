//! Bound-state spectra of the 2D radial Schrödinger equation for central
//! potentials deformed by space noncommutativity.
//!
//! Two potential families are covered, `a r^2 + b r^-2 + c r^-4` and
//! `a r^-1 + b r^-2`. Each has a closed-form (quasi-exact) solver, and a
//! finite-difference [`oracle`] checks every closed-form claim independently.

pub mod deformation;
pub mod error;
pub mod evenpower;
pub mod invpower;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod verify;

pub use deformation::{
    deform, deform_even_power, deform_inverse_power, DeformedRadialProblem, Family, NcContext, PotentialSpec,
};
pub use error::{Error, Result};
pub use oracle::{match_level, ode_residual, solve_radial, GridSpec, Mapping, OracleResult};
