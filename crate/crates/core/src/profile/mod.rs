//! The single-bump limit problem on the strip.

pub mod cache;
pub mod decay;
pub mod ground_state;
pub mod nondegeneracy;
pub mod nonlinearity;
pub mod truncation;

pub use decay::{decay_rate, DecayFit};
pub use ground_state::{decay_rate_exact, field_energy, solve_ground_state, BumpProfile, LAMBDA_11};
pub use nondegeneracy::{check_nondegeneracy, NondegeneracyReport};
pub use nonlinearity::{NonlinearityKind, NonlinearitySpec};
pub use truncation::truncated_projection;
