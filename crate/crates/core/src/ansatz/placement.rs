//! Copies of a strip profile on tube windows.

use crate::error::{Error, Result};
use crate::pde::grid::{Grid, GridField};
use crate::profile::BumpProfile;
use std::sync::Arc;

/// Natural cubic spline through `y` at unit spacing; returns second derivatives.
fn spline_second_derivatives(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on 4 m_i + m_{i-1} + m_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1})
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for i in 0..k {
        let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]);
        if i == 0 {
            c[0] = 1.0 / 4.0;
            d[0] = rhs / 4.0;
        } else {
            let den = 4.0 - c[i - 1];
            c[i] = 1.0 / den;
            d[i] = (rhs - d[i - 1]) / den;
        }
    }
    for i in (0..k).rev() {
        m[i + 1] = if i + 1 < k { d[i] - c[i] * m[i + 2] } else { d[i] };
    }
    m
}

/// A profile prepared for evaluation between its grid columns.
///
/// Every eta-row carries a natural cubic spline in xi through the profile
/// values, including the Dirichlet zeros at `xi = +-L`.
#[derive(Debug, Clone)]
pub struct BumpSource {
    sign: i8,
    half_length: f64,
    h: f64,
    nrows: usize,
    /// `[row][k]`, k indexes xi = -L + k h for k = 0..=ncols + 1
    values: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    peak: f64,
}

impl BumpSource {
    pub fn new(profile: &BumpProfile) -> Self {
        Self::from_field(profile.field(), profile.sign())
    }

    /// Any strip field (e.g. a truncated projection) can serve as a source.
    pub fn from_field(field: &GridField, sign: i8) -> Self {
        let g = field.grid();
        let (nc, nr) = (g.ncols(), g.nrows());
        let mut values = Vec::with_capacity(nr);
        let mut second = Vec::with_capacity(nr);
        for j in 0..nr {
            let mut row = Vec::with_capacity(nc + 2);
            row.push(0.0);
            row.extend((0..nc).map(|c| field.at(c, j)));
            row.push(0.0);
            second.push(spline_second_derivatives(&row));
            values.push(row);
        }
        let peak = field.values().iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        BumpSource { sign, half_length: -g.s_origin() + g.hs(), h: g.hs(), nrows: nr, values, second, peak }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Value of largest magnitude.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// Profile value at `(xi, eta_row)`; zero outside the strip.
    pub fn row_value(&self, xi: f64, row: usize) -> f64 {
        let q = (xi + self.half_length) / self.h;
        let last = (self.values[row].len() - 1) as f64;
        if !(q > 0.0 && q < last) {
            return 0.0;
        }
        let k = (q.floor() as usize).min(self.values[row].len() - 2);
        let b = q - k as f64;
        let a = 1.0 - b;
        let y = &self.values[row];
        let m = &self.second[row];
        a * y[k] + b * y[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) / 6.0
    }

    /// Profile value at an arbitrary point `(xi, zeta)` of the strip: the row
    /// splines combined by cubic Lagrange interpolation across eta.
    pub fn value(&self, xi: f64, zeta: f64) -> f64 {
        if !(zeta.abs() < 1.0) || !(xi.abs() < self.half_length) {
            return 0.0;
        }
        // padded rows: index 0 and nrows + 1 are the Dirichlet rows eta = -1, 1
        let q = (zeta + 1.0) / self.h;
        let base = (q.floor() as isize - 1).clamp(0, self.nrows as isize - 2);
        let mut acc = 0.0;
        for i in 0..4 {
            let node = base + i as isize;
            let mut w = 1.0;
            for k in 0..4 {
                if k != i {
                    let other = (base + k as isize) as f64;
                    w *= (q - other) / (node as f64 - other);
                }
            }
            let v = if node <= 0 || node as usize > self.nrows { 0.0 } else { self.row_value(xi, node as usize - 1) };
            acc += w * v;
        }
        acc
    }
}

/// A profile copy restricted to a window of tube columns around `s0`.
#[derive(Debug, Clone)]
pub struct PlacedBump {
    pub sign: i8,
    /// arc-length position of the anchor on the expanded curve
    pub s0: f64,
    pub window: Arc<Grid>,
    pub field: GridField,
}

impl PlacedBump {
    /// The field extended by zero to the whole tube.
    pub fn on_parent(&self, parent: &Arc<Grid>) -> Result<GridField> {
        self.field.embed_into(parent)
    }
}

/// Columns of `grid` within `half` of `s0`, clipped at open ends.
pub fn bump_window(grid: &Grid, s0: f64, half: f64) -> Result<Arc<Grid>> {
    let hs = grid.hs();
    let origin = grid.s_origin();
    let first = ((s0 - half - origin) / hs - 1e-9).ceil() as i64;
    let last = ((s0 + half - origin) / hs + 1e-9).floor() as i64;
    let n = grid.ncols() as i64;
    if grid.periodic() {
        let count = last - first + 1;
        if count >= n {
            return Err(Error::WindowOverflow(format!(
                "window of {count} columns does not fit on a ring of {n} columns"
            )));
        }
        grid.window(first.rem_euclid(n) as usize, count as usize)
    } else {
        let extent = grid.s_extent();
        if !(s0 > 0.0 && s0 < extent) {
            return Err(Error::WindowOverflow(format!("anchor s = {s0} lies outside the tube (0, {extent})")));
        }
        let (a, b) = (first.max(0), last.min(n - 1));
        if b - a + 1 < 3 {
            return Err(Error::WindowOverflow(format!("anchor s = {s0} leaves fewer than 3 columns")));
        }
        grid.window(a as usize, (b - a + 1) as usize)
    }
}

/// Offset `s - s0` of window column `c`, wrapped to the nearest copy on rings.
fn offset(window: &Grid, c: usize, s0: f64, ring: Option<f64>) -> f64 {
    let d = window.s(c) - s0;
    match ring {
        Some(len) => d - len * (d / len).round(),
        None => d,
    }
}

fn ring_length(parent_periodic: bool, grid: &Grid) -> Option<f64> {
    let info = grid.window_info()?;
    if parent_periodic {
        Some(info.parent_cols as f64 * grid.hs())
    } else {
        None
    }
}

/// Writes `source` shifted to `s0` onto an existing window, reading the
/// profile at `(s - s0, eta)` row by row.
pub fn place_in_window(source: &BumpSource, window: &Arc<Grid>, s0: f64) -> Result<PlacedBump> {
    if window.nrows() != source.nrows() || (window.heta() - source.spacing()).abs() > 1e-12 {
        return Err(Error::ResolutionError(format!(
            "profile has {} rows at spacing {}, tube has {} rows at {}",
            source.nrows(),
            source.spacing(),
            window.nrows(),
            window.heta()
        )));
    }
    let periodic = window.window_info().is_some_and(|w| w.parent_periodic);
    let ring = ring_length(periodic, window);
    let nr = window.nrows();
    let mut values = Vec::with_capacity(window.len());
    for c in 0..window.ncols() {
        let xi = offset(window, c, s0, ring);
        for j in 0..nr {
            values.push(source.row_value(xi, j));
        }
    }
    Ok(PlacedBump { sign: source.sign(), s0, window: window.clone(), field: GridField::new(window.clone(), values)? })
}

/// `U(s - s0, eta)` on the window of half-length `half` around `s0`.
pub fn place_bump(source: &BumpSource, grid: &Grid, s0: f64, half: f64) -> Result<PlacedBump> {
    let window = bump_window(grid, s0, half)?;
    place_in_window(source, &window, s0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_nodes_and_quadratics_inside() {
        let y: Vec<f64> = (0..20).map(|k| (k as f64 * 0.3).sin()).collect();
        let m = spline_second_derivatives(&y);
        assert_eq!(m[0], 0.0);
        assert_eq!(m[19], 0.0);
        // interior second derivatives approximate -0.09 sin
        for k in 5..15 {
            assert!((m[k] + 0.09 * y[k]).abs() < 1e-3, "{k}: {} vs {}", m[k], -0.09 * y[k]);
        }
    }
}
