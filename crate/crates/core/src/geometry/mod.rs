//! Curves, expanded curves, chains and small geometric oracles.

pub mod chain;
pub mod curve;
pub mod fermat;
pub mod montecarlo;

pub use chain::{chain_admissible, chain_from_params, AdmissibilityReport, Chain, SeparationScales};
pub use curve::{make_curve, CurveKind, CurveSource, CurveSpec, Point};
pub use fermat::{fermat_point, FermatPoint};
pub use montecarlo::{ball_difference_exact, ball_difference_volume, VolumeEstimate};
