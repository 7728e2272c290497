//! Comparison with the bump in the ambient plane, `U(A_x (y - x))`, which is
//! not adapted to the curved tube and leaks out of it.

use super::placement::{bump_window, BumpSource};
use crate::error::Result;
use crate::geometry::curve::gauss_legendre_5;
use crate::geometry::CurveSpec;
use crate::pde::grid::{Grid, GridField};
use crate::profile::truncation::h1_norm;
use std::sync::Arc;

const NEWTON_STEPS: usize = 12;
const FD_STEP: f64 = 1e-6;

/// Closest point of `R gamma` to `y`, by Newton on the foot-point condition.
/// Returns `None` when the foot point runs off an open curve.
fn foot_point(curve: &CurveSpec, r: f64, y: [f64; 2], guess: f64) -> Option<(f64, f64)> {
    let mut t = guess;
    for _ in 0..NEWTON_STEPS {
        let p = curve.point(t);
        let d1 = curve.d1(t);
        let d2 = curve.d2(t);
        let e = [r * p[0] - y[0], r * p[1] - y[1]];
        let g = e[0] * d1[0] + e[1] * d1[1];
        let dg = r * (d1[0] * d1[0] + d1[1] * d1[1]) + e[0] * d2[0] + e[1] * d2[1];
        let step = g / dg;
        t -= step;
        if curve.closed() {
            t = t.rem_euclid(1.0);
        } else if !(0.0..=1.0).contains(&t) {
            return None;
        }
        if step.abs() < 1e-15 {
            break;
        }
    }
    let p = curve.point(t);
    Some((t, (r * p[0] - y[0]).hypot(r * p[1] - y[1])))
}

/// `U(A_x (y - x))` with `x = R gamma(t0)` at the tube nodes within `half`
/// of the anchor, zero elsewhere.
pub fn ambient_bump(source: &BumpSource, curve: &CurveSpec, r: f64, grid: &Arc<Grid>, t0: f64, half: f64) -> Result<GridField> {
    let s0 = r * curve.arc_of_t(t0);
    let window = bump_window(grid, s0, half)?;
    let p = curve.point(t0);
    let x = [r * p[0], r * p[1]];
    let tau = curve.unit_tangent(t0);
    let nu = curve.unit_normal(t0);
    let total = r * curve.length();
    let nr = window.nrows();
    let mut values = Vec::with_capacity(window.len());
    for c in 0..window.ncols() {
        let s = window.s(c).rem_euclid(total);
        let t = curve.t_of_arc(s / r);
        let q = curve.point(t);
        let n = curve.unit_normal(t);
        for j in 0..nr {
            let eta = window.eta(j);
            let y = [r * q[0] + eta * n[0] - x[0], r * q[1] + eta * n[1] - x[1]];
            let xi = y[0] * tau[0] + y[1] * tau[1];
            let zeta = y[0] * nu[0] + y[1] * nu[1];
            values.push(source.value(xi, zeta));
        }
    }
    GridField::new(window, values)?.embed_into(grid)
}

fn outside(curve: &CurveSpec, r: f64, y: [f64; 2], guess: &mut f64) -> bool {
    match foot_point(curve, r, y, *guess) {
        Some((t, d)) => {
            *guess = t;
            d >= 1.0
        }
        None => true,
    }
}

fn h1_density(source: &BumpSource, xi: f64, zeta: f64) -> f64 {
    let e = FD_STEP.min(0.25 * (1.0 - zeta.abs()));
    let u = source.value(xi, zeta);
    let ux = (source.value(xi + FD_STEP, zeta) - source.value(xi - FD_STEP, zeta)) / (2.0 * FD_STEP);
    let uz = (source.value(xi, zeta + e) - source.value(xi, zeta - e)) / (2.0 * e);
    ux * ux + uz * uz + u * u
}

/// `integral of |grad U|^2 + U^2` over the part of the ambient strip copy at
/// `R gamma(t0)` that lies outside the tube, for `|xi| < half`.
///
/// Midpoint rule of width `hq` in xi. Along each xi line the outside set is
/// located by sampling at spacing `hq` (end points included) and bisecting
/// sign changes, then integrated with 5-point Gauss rules, so slivers much
/// thinner than `hq` are still resolved.
pub fn outside_h1_squared(source: &BumpSource, curve: &CurveSpec, r: f64, t0: f64, half: f64, hq: f64) -> f64 {
    let p = curve.point(t0);
    let x = [r * p[0], r * p[1]];
    let tau = curve.unit_tangent(t0);
    let nu = curve.unit_normal(t0);
    let speed = r * crate::geometry::curve::norm(curve.d1(t0));
    let nx = (2.0 * half / hq).ceil() as usize;
    let ny = (2.0 / hq).ceil() as usize;
    let (dx, dy) = (2.0 * half / nx as f64, 2.0 / ny as f64);
    let (nodes, weights) = gauss_legendre_5();
    let mut acc = 0.0;
    for i in 0..nx {
        let xi = -half + (i as f64 + 0.5) * dx;
        let mut guess = t0 + xi / speed;
        let point = |zeta: f64| [x[0] + xi * tau[0] + zeta * nu[0], x[1] + xi * tau[1] + zeta * nu[1]];
        let flags: Vec<bool> = (0..=ny).map(|k| outside(curve, r, point(-1.0 + k as f64 * dy), &mut guess)).collect();
        // boundaries of the outside set along this line
        let mut cuts = Vec::new();
        for k in 0..ny {
            if flags[k] != flags[k + 1] {
                let (mut lo, mut hi) = (-1.0 + k as f64 * dy, -1.0 + (k + 1) as f64 * dy);
                let mut g = guess;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if outside(curve, r, point(mid), &mut g) == flags[k] {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                cuts.push(0.5 * (lo + hi));
            }
        }
        let mut edges = vec![-1.0];
        edges.extend(cuts);
        edges.push(1.0);
        let mut state = flags[0];
        for w in edges.windows(2) {
            if state {
                let (a, b) = (w[0], w[1]);
                let half_len = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                let seg: f64 = nodes
                    .iter()
                    .zip(weights.iter())
                    .map(|(z, wt)| wt * h1_density(source, xi, mid + half_len * z))
                    .sum();
                acc += seg * half_len * dx;
            }
            state = !state;
        }
    }
    acc
}

/// Pieces of the H^1 distance between a tube field `v` (zero outside the
/// tube) and the ambient bump anchored at `R gamma(t0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientDistance {
    /// discrete H^1 norm of `v - U(A_x(y - x))` on the tube nodes
    pub inside: f64,
    /// continuous H^1 norm of the ambient bump outside the tube
    pub outside: f64,
    pub total: f64,
}

pub fn ambient_h1_distance(
    v: &GridField,
    source: &BumpSource,
    curve: &CurveSpec,
    r: f64,
    t0: f64,
    half: f64,
) -> Result<AmbientDistance> {
    let grid = v.grid();
    let ua = ambient_bump(source, curve, r, grid, t0, half)?;
    let inside = h1_norm(&v.axpy(-1.0, &ua));
    let outside = outside_h1_squared(source, curve, r, t0, half, 0.5 * grid.heta()).sqrt();
    Ok(AmbientDistance { inside, outside, total: inside.hypot(outside) })
}
