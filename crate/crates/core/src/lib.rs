//! Alternating-sign multibump solutions of `-Delta u + lambda u = f(u)` on thin
//! tubes around expanded planar curves.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: curves, chains of points on `R gamma`, separation scales
//!   and two small geometric oracles (Fermat point, ball differences).
//! - [`pde`]: strip and tube grids in arc-length/normal coordinates, the
//!   divergence-form Dirichlet operator, linear solves and eigenpairs.
//! - [`profile`]: the single-bump ground state on the infinite strip, its decay
//!   rate, nondegeneracy and truncations.
//! - [`ansatz`]: placing and projecting bumps on the tube and summing them.
//! - [`energy`]: the energy functional, its a-gradient, interaction integrals,
//!   the normal-space reduction and chain minimization.
//! - [`pipeline`]: configuration files, end-to-end runs, sweeps over `R` and
//!   the verification report.

pub mod ansatz;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod pde;
pub mod pipeline;
pub mod profile;

pub use error::{Error, Result};
