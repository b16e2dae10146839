//! Numerical laboratory for the two-dimensional inhomogeneous incompressible
//! MHD boundary-layer equations on the periodic half plane.
//!
//! The crate evolves the shifted unknowns `(rho - 1, u, h)` of the
//! tangentially regularized system, evaluates weighted conormal norms with
//! time derivatives obtained from the equations themselves, and checks the
//! functional inequalities and cancellation identities that the local
//! well-posedness theory relies on.

pub mod cancellation;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod heat;
pub mod inequalities;
pub mod norms;
pub mod pde;
pub mod solver;
pub mod sources;
pub mod state;

pub use error::{Error, Result};
pub use field::{Field, MultiIndex};
pub use grid::{build_grid, Grid, GridSpec, XDerivative};
pub use state::{Physics, State};
