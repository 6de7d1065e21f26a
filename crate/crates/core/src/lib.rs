//! Numerical laboratory for Coulomb moving frames on conformally immersed
//! annuli: log-polar grids and discrete calculus, a catalog of conformal
//! immersions plus a Weierstrass generator, canonical and gauge-rotated
//! moving frames, elliptic solvers with Wente-constant audits, and
//! executable verification of the frame-energy estimates.

pub mod calculus;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod frame;
pub mod pde;
pub mod surface;
pub mod theorems;
pub mod weierstrass;

pub use error::{Error, Result};
pub use field::{AmbientField, OneForm, ScalarField};
pub use grid::{make_grid, GridSpec};
