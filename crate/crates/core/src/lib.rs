//! Finite elements for scalar parabolic problems on moving 2D domains.
//!
//! Everything is posed on a fixed referent triangulation. Domain motion is
//! carried by a piecewise-linear displacement field whose time dependence on
//! each step is a polynomial, so the grid-velocity flux `∫ C(t) w(t) dt` is
//! integrated exactly and the discrete space conservation law holds to
//! rounding for every time scheme.
//!
//! Module map:
//! - [`mesh`]: the referent unit-square triangulation.
//! - [`poly`]: small monomial time polynomials.
//! - [`ale`]: prescribed maps, grid velocity, per-element geometry, SCL residual.
//! - [`fem`]: Lagrange P1/P2 spaces, quadrature, assembly, Dirichlet, solves, norms.
//! - [`schemes`]: modified and classical IE/CN/BDF steppers and the run driver.
//! - [`problems`]: benchmark problems with manufactured forcing.
//! - [`verify`]: identity suites and convergence-rate estimation.

pub mod ale;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod poly;
pub mod problems;
pub mod schemes;
pub mod verify;

pub use error::{Error, Result};

/// A point or vector in the plane.
pub type Point = [f64; 2];
