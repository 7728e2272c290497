//! Finite-difference Dirichlet operators on strips and tubes.

pub mod banded;
pub mod cg;
pub mod eigen;
pub mod export;
pub mod grid;
pub mod operator;

pub use eigen::{smallest_eigenpairs, EigenPair};
pub use grid::{build_strip_grid, build_tube_grid, Grid, GridField, GridKind};
pub use operator::{a_inner, apply_helmholtz, solve_linear, ShiftedOperator};
