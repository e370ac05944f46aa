//! Lagrange P1/P2 finite elements on the fixed referent mesh.

mod assembly;
mod basis;
mod dirichlet;
mod norms;
mod quadrature;
mod solve;
mod space;
mod sparse;

pub use assembly::{
    assemble_load, assemble_mass_on_coords, assemble_mesh_motion_operator, assemble_pulled_back_stiffness,
    assemble_stiffness_on_coords, assemble_weighted_mass, QuadPoint,
};
pub use basis::{reference_basis, LocalBasis};
pub use dirichlet::apply_dirichlet;
pub use norms::{l2_error_vs_exact, l2_norm_current_domain};
pub use quadrature::QuadratureRule;
pub use solve::{solve_sparse, LinearSolver, DIRECT_SOLVE_LIMIT};
pub use space::{FeSpace, ScalarField};
pub use sparse::SparseMatrix;
