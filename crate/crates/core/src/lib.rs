//! Shooting for constant-mean-curvature spheres of revolution in
//! asymptotically Schwarzschild 3-manifolds.

pub mod error;
pub mod metric;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub mod analysis;
pub mod geometry;
pub mod identities;
pub mod shooting;
pub mod sweep;

pub mod cli;
pub mod io;

pub use error::{Error, Result};
