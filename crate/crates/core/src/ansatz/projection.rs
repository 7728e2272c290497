//! Projected bumps: the linear Dirichlet solve on a tube window with the
//! nonlinearity of a placed bump as right-hand side.

use super::placement::{place_in_window, BumpSource, PlacedBump};
use crate::error::{Error, Result};
use crate::pde::grid::{Grid, GridField};
use crate::pde::operator::{ShiftedOperator, SOLVE_TOL};
use crate::profile::truncation::truncated_projection;
use crate::profile::{BumpProfile, NonlinearitySpec};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Relative size of an opposite-sign value tolerated as round-off.
const SIGN_SLACK: f64 = 1e-12;

/// Factored window operators `K + lambda M`, keyed by window placement.
/// Windows of a tube with constant curvature share one factor per length.
#[derive(Debug, Default)]
pub struct WindowCache {
    factors: Mutex<HashMap<(usize, usize), Arc<ShiftedOperator>>>,
}

impl WindowCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.factors.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn operator(&self, window: &Arc<Grid>, lambda: f64) -> Result<Arc<ShiftedOperator>> {
        let start = window.window_info().map_or(0, |w| w.start);
        let key = (if window.uniform() { 0 } else { start }, window.ncols());
        if let Some(op) = self.factors.lock().expect("cache lock").get(&key) {
            return Ok(op.clone());
        }
        let op = match ShiftedOperator::helmholtz(window.clone(), lambda) {
            Ok(op) => Arc::new(op),
            Err(Error::IndefiniteOperator { .. }) => return Err(Error::IndefiniteWindow),
            Err(e) => return Err(e),
        };
        self.factors.lock().expect("cache lock").insert(key, op.clone());
        Ok(op)
    }
}

/// Solves `(-Delta_h + lambda) v = rhs` on the window of `rhs` with a cached factor.
pub fn window_solve(cache: &WindowCache, lambda: f64, rhs: &GridField) -> Result<GridField> {
    let window = rhs.grid();
    let op = cache.operator(window, lambda)?;
    let m = window.mass();
    let b: Vec<f64> = rhs.values().iter().zip(m).map(|(f, w)| f * w).collect();
    let x = op.solve_raw(&b);
    // residual against this window's own coefficients
    let mut ax = vec![0.0; x.len()];
    crate::pde::operator::apply_shifted(window, lambda, None, &x, &mut ax);
    let res = ax.iter().zip(&b).zip(m).fold(0.0f64, |acc, ((a, b), w)| acc.max((a - b).abs() / w));
    let scale = rhs.max_abs();
    if res > SOLVE_TOL * scale {
        return Err(Error::SolverDivergence(format!("window residual {res:.3e} against {scale:.3e}")));
    }
    GridField::new(window.clone(), x)
}

#[derive(Debug, Clone)]
pub struct ProjectedBump {
    pub placed: PlacedBump,
    /// solution of the window problem, on `placed.window`
    pub v: GridField,
    /// truncated strip projection carried onto the same window (open tubes only)
    pub w: Option<GridField>,
    /// arc distances `(a, b)` to the two ends of an open tube
    pub ends: Option<(f64, f64)>,
}

/// Computes `V` for a placed bump and checks that it keeps the bump's sign.
pub fn project_bump(cache: &WindowCache, placed: &PlacedBump, lambda: f64, nl: &NonlinearitySpec) -> Result<ProjectedBump> {
    let rhs = placed.field.map(|u| nl.f(u));
    let v = window_solve(cache, lambda, &rhs)?;
    check_sign(&v, placed.sign)?;
    Ok(ProjectedBump { placed: placed.clone(), v, w: None, ends: None })
}

/// Rejects fields whose values have the wrong sign beyond round-off.
pub fn check_sign(v: &GridField, sign: i8) -> Result<()> {
    let s = sign as f64;
    let (min, max) = v.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    let worst = v.values().iter().fold(0.0f64, |m, x| m.min(s * x));
    if worst < -SIGN_SLACK * v.max_abs() {
        return Err(Error::SignViolation { min, max });
    }
    Ok(())
}

/// Adds the end-corrected bump `W`: the profile truncated to `(-a, b)`,
/// with `a`, `b` the arc distances of the anchor to the tube ends (capped at
/// `L - 1` and rounded down to strip columns). `None` on closed tubes or when
/// an end is closer than one unit.
pub fn attach_end_correction(projected: &mut ProjectedBump, profile: &BumpProfile, tube_length: f64) -> Result<()> {
    let window = projected.placed.window.clone();
    if window.window_info().is_some_and(|w| w.parent_periodic) {
        return Ok(());
    }
    let s0 = projected.placed.s0;
    let (a, b) = (s0, tube_length - s0);
    projected.ends = Some((a, b));
    let h = profile.grid().hs();
    let cap = profile.half_length() - 1.0;
    let snap = |d: f64| ((d.min(cap) / h + 1e-9).floor()) * h;
    let (ta, tb) = (snap(a), snap(b));
    if ta < 1.0 - 1e-12 || tb < 1.0 - 1e-12 {
        return Ok(());
    }
    let ut = truncated_projection(profile, ta, tb)?;
    let source = BumpSource::from_field(&ut, profile.sign());
    let w = place_in_window(&source, &window, s0)?;
    projected.w = Some(w.field);
    Ok(())
}
