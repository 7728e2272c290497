//! Energy, a-gradient, interactions, the reduction and chain minimization.

pub mod functional;
pub mod minimize;
pub mod reduction;

pub use functional::{interaction_integral, EnergySplit, Functional};
pub use minimize::{minimize_chain, MinimizeOptions, MinimizeResult, TraceRow};
pub use reduction::{normal_refine, reduced_energy, EnergyReport, ReductionResult, TOL_REDUCE};
