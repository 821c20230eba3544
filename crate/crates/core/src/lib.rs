//! Numerical laboratory for calculus on the Heisenberg group and the
//! nonlinear capacity method for Sobolev-type equations
//!
//! ```text
//! d/dt Delta_H u + Delta_H u + |u|^q = 0
//! d2/dt2 Delta_H u + Delta_H u + |u|^q = 0
//! ```
//!
//! Modules are layered bottom-up: [`group`] and [`calculus`] provide the
//! group law and the sub-Laplacian, [`test_functions`] builds the cutoff test
//! functions, [`capacity`] evaluates the capacity integrals and a-priori
//! bounds, [`weak`] checks weak-formulation identities, [`sim`] runs a
//! finite-difference simulation, and [`report`]/[`cli`] drive everything
//! from the command line.

pub mod calculus;
pub mod capacity;
pub mod cli;
pub mod error;
pub mod field;
pub mod group;
pub mod identities;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod sim;
pub mod test_functions;
pub mod weak;

pub use error::{LabError, Result};
pub use group::{GroupParams, GroupPoint};
