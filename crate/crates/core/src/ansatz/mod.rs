//! Bumps on the tube: placement, projection and the multibump sum.

pub mod ambient;
pub mod assemble;
pub mod placement;
pub mod projection;

pub use assemble::{anchor_node, assemble_multibump, Ansatz, AnsatzContext, WINDOW_DECAY_LENGTHS};
pub use ambient::{ambient_bump, ambient_h1_distance, AmbientDistance};
pub use placement::{bump_window, place_bump, place_in_window, BumpSource, PlacedBump};
pub use projection::{check_sign, project_bump, window_solve, ProjectedBump, WindowCache};
