//! Stabilized P1×P0 finite element schemes for incompressible flow: a reduced
//! Bernardi–Raugel element with statically condensed face bubbles, BDM
//! postprocessed test functions and edge-averaged (EAFE) convection.

pub mod bench;
pub mod error;
pub mod fespace;
pub mod forms;
pub mod io;
pub mod linalg;
pub mod linsolve;
pub mod mesh;
pub mod quadrature;
pub mod schemes;
pub mod sparse;

pub use error::{Error, Result};
