//! Projections of a profile onto finite pieces `(-a, b) x (-1, 1)` of the strip.

use super::ground_state::BumpProfile;
use crate::error::{Error, Result};
use crate::pde::grid::{Grid, GridField};
use crate::pde::operator::ShiftedOperator;
use std::sync::Arc;

/// Window of the strip whose Dirichlet ends sit at `xi = -a` and `xi = b`.
pub fn strip_window(grid: &Grid, a: f64, b: f64) -> Result<Arc<Grid>> {
    let pos = |xi: f64| -> Result<usize> {
        let q = (xi - grid.s_origin()) / grid.hs();
        let r = q.round();
        if (q - r).abs() > 1e-6 || r < 0.0 || r >= grid.ncols() as f64 {
            return Err(Error::RangeViolation(format!("xi = {xi} is not an interior grid column")));
        }
        Ok(r as usize)
    };
    let left = pos(-a)?;
    let right = pos(b)?;
    if right <= left + 3 {
        return Err(Error::RangeViolation(format!("window (-{a}, {b}) is too short")));
    }
    grid.window(left + 1, right - left - 1)
}

/// Solves `-Delta u + lambda u = f(U)` on `(-a, b) x (-1, 1)` and extends by zero.
pub fn truncated_projection(profile: &BumpProfile, a: f64, b: f64) -> Result<GridField> {
    let half = profile.half_length();
    for (name, v) in [("a", a), ("b", b)] {
        if !(v >= 1.0 - 1e-12 && v <= half - 1.0 + 1e-12) {
            return Err(Error::RangeViolation(format!("{name} = {v} outside [1, {}]", half - 1.0)));
        }
    }
    let g = profile.grid();
    let win = strip_window(g, a, b)?;
    let nl = profile.nonlinearity();
    let rhs = profile.field().map(|v| nl.f(v)).restrict_to(&win)?;
    // lambda > -pi^2/4 makes the window operator positive definite
    let op = ShiftedOperator::helmholtz(win, profile.lambda())?;
    op.solve(&rhs)?.embed_into(g)
}

/// `sqrt(u^T (K + M) u)`: the discrete H^1 norm.
pub fn h1_norm(field: &GridField) -> f64 {
    let g = field.grid();
    crate::pde::operator::a_inner(g, 1.0, field.values(), field.values()).sqrt()
}
