//! Kernel of the linearization `-Delta_h + lambda - f'(U)` at a profile.

use super::ground_state::BumpProfile;
use crate::error::{Error, Result};
use crate::pde::eigen::smallest_eigenpairs;
use crate::pde::grid::GridField;
use crate::pde::operator::ShiftedOperator;

pub const EPS0_FLOOR: f64 = 1e-2;
const PAIRS: usize = 4;

#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    /// smallest eigenvalues of the linearization, ascending
    pub eigenvalues: Vec<f64>,
    pub eps0: f64,
    /// eigenvalues in (-eps0, eps0), counted by inertia
    pub kernel_count: usize,
    /// eigenvalue of the translation mode
    pub translation: f64,
    /// cosine between its eigenfield and the discrete d/dxi U
    pub cosine: f64,
    /// smallest |eigenvalue| among the remaining computed ones
    pub next_abs: f64,
    pub passed: bool,
}

/// Eigenvalues of the linearization below `t`, by inertia.
fn count_below(profile: &BumpProfile, potential: &[f64], t: f64) -> Result<usize> {
    let op = ShiftedOperator::new(profile.grid().clone(), -t, Some(potential.to_vec()))?;
    Ok(op.negative_count())
}

/// Central difference of the profile along xi.
pub fn xi_derivative(profile: &BumpProfile) -> GridField {
    let g = profile.grid();
    let (nc, nr) = (g.ncols(), g.nrows());
    let u = profile.field();
    let mut d = vec![0.0; g.len()];
    for c in 0..nc {
        for j in 0..nr {
            let right = if c + 1 < nc { u.at(c + 1, j) } else { 0.0 };
            let left = if c > 0 { u.at(c - 1, j) } else { 0.0 };
            d[g.idx(c, j)] = (right - left) / (2.0 * g.hs());
        }
    }
    GridField::from_parts(g.clone(), d)
}

/// Checks that the linearization has a one-dimensional near-kernel spanned
/// by the translation mode. `eps0` defaults to `max(1e-2, 5 |theta_translation|)`.
pub fn check_nondegeneracy(profile: &BumpProfile, eps0: Option<f64>) -> Result<NondegeneracyReport> {
    let g = profile.grid();
    let nl = profile.nonlinearity();
    let lambda = profile.lambda();
    let potential: Vec<f64> = profile.field().values().iter().map(|&v| lambda - nl.df(v)).collect();
    let pot_field = GridField::new(g.clone(), potential.clone())?;
    let pairs = smallest_eigenpairs(g, Some(&pot_field), PAIRS)?;

    let dxi = xi_derivative(profile);
    let dn = dxi.l2_norm();
    // the translation mode is the eigenfield best aligned with d/dxi U
    let (ti, cosine) = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p.field.l2_dot(&dxi) / (dn * p.field.l2_norm())).abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let translation = pairs[ti].value;
    let eps0 = eps0.unwrap_or_else(|| EPS0_FLOOR.max(5.0 * translation.abs()));
    let kernel_count = count_below(profile, &potential, eps0)? - count_below(profile, &potential, -eps0)?;
    let next_abs = pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ti)
        .fold(f64::INFINITY, |m, (_, p)| m.min(p.value.abs()));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    if kernel_count > 1 {
        return Err(Error::DegeneracySuspected { count: kernel_count, eps0 });
    }
    let passed = kernel_count == 1 && translation.abs() < eps0 && cosine >= 0.999 && next_abs >= 10.0 * eps0;
    Ok(NondegeneracyReport { eigenvalues, eps0, kernel_count, translation, cosine, next_abs, passed })
}
