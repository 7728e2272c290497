//! Strip and tube grids in (s, eta) coordinates, and fields living on them.
//!
//! Only interior (unknown) nodes are stored. Column `c` holds the nodes at
//! `s = s_origin + c * hs`; row `j` sits at `eta = -1 + (j + 1) * heta`. The
//! Dirichlet rows `eta = +-1` and, on non-periodic grids, the two end columns
//! are implicit zeros.

use crate::error::{Error, Result};
use crate::geometry::CurveSpec;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Strip,
    Tube,
}

/// Placement of a window inside its parent grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowInfo {
    /// first parent column covered by the window
    pub start: usize,
    /// number of unknown columns of the parent
    pub parent_cols: usize,
    pub parent_periodic: bool,
}

#[derive(Debug, Clone)]
pub struct Grid {
    kind: GridKind,
    ncols: usize,
    nrows: usize,
    hs: f64,
    heta: f64,
    periodic: bool,
    s_origin: f64,
    inv_r: f64,
    /// curvature of the unit curve at each column
    kappa_col: Vec<f64>,
    /// curvature at half columns; entry c sits between columns c-1 and c
    kappa_half: Vec<f64>,
    uniform: bool,
    window: Option<WindowInfo>,
    /// (heta/hs) / J at half columns, `[half][row]`
    cs: Vec<f64>,
    /// (hs/heta) * J at half rows, `[col][half_row]` with nrows + 1 half rows
    ce: Vec<f64>,
    /// J * hs * heta per node
    mass: Vec<f64>,
    min_jacobian: f64,
}

fn divides(h: f64, len: f64) -> Option<usize> {
    let q = len / h;
    let r = q.round();
    if r >= 1.0 && (q - r).abs() <= 1e-9 * r.max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

fn check_spacing(h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::ResolutionError(format!("spacing must be positive, got {h}")));
    }
    let m = divides(h, 2.0).ok_or_else(|| Error::ResolutionError(format!("h = {h} does not divide the cross-section width 2")))?;
    if m < 4 {
        return Err(Error::ResolutionError(format!("h = {h} leaves fewer than 3 interior rows")));
    }
    Ok(m - 1)
}

/// Grid on the truncated strip `(-L, L) x (-1, 1)`.
pub fn build_strip_grid(l_xi: f64, h: f64) -> Result<Arc<Grid>> {
    let nrows = check_spacing(h)?;
    if !(l_xi.is_finite() && l_xi > 0.0) {
        return Err(Error::ResolutionError(format!("strip half-length must be positive, got {l_xi}")));
    }
    let intervals = divides(h, 2.0 * l_xi)
        .ok_or_else(|| Error::ResolutionError(format!("h = {h} does not divide the strip length {}", 2.0 * l_xi)))?;
    if intervals < 4 {
        return Err(Error::ResolutionError("strip has fewer than 3 interior columns".into()));
    }
    let ncols = intervals - 1;
    let hs = 2.0 * l_xi / intervals as f64;
    let grid = Grid::assemble(
        GridKind::Strip,
        ncols,
        nrows,
        hs,
        h,
        false,
        -l_xi + hs,
        0.0,
        vec![0.0; ncols],
        vec![0.0; ncols + 1],
        true,
        None,
    );
    Ok(Arc::new(grid))
}

/// Grid on the tube of half-width 1 around `R gamma`, in arc length and normal offset.
pub fn build_tube_grid(curve: &CurveSpec, r: f64, h: f64) -> Result<Arc<Grid>> {
    let nrows = check_spacing(h)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::RangeViolation(format!("R must be positive, got {r}")));
    }
    let kmax = curve.kappa_max();
    if 1.0 - kmax / r <= 0.0 {
        return Err(Error::CurvatureTooLarge { min_jacobian: 1.0 - kmax / r, kappa_max: kmax });
    }
    let total = r * curve.length();
    let intervals = (total / h).round().max(1.0) as usize;
    let hs = total / intervals as f64;
    let periodic = curve.closed();
    let (ncols, s_origin) = if periodic { (intervals, 0.0) } else { (intervals.saturating_sub(1), hs) };
    if ncols < 3 {
        return Err(Error::ResolutionError(format!("tube of length {total} has fewer than 3 columns at h = {h}")));
    }
    let uniform = curve.uniform_curvature();
    let kappa_at = |s: f64| {
        if uniform {
            curve.curvature(0.0)
        } else {
            let sigma = (s / r).rem_euclid(curve.length());
            curve.curvature(curve.t_of_arc(sigma))
        }
    };
    let kappa_col: Vec<f64> = (0..ncols).map(|c| kappa_at(s_origin + c as f64 * hs)).collect();
    let nhalf = if periodic { ncols } else { ncols + 1 };
    let kappa_half: Vec<f64> = (0..nhalf).map(|c| kappa_at(s_origin + (c as f64 - 0.5) * hs)).collect();
    let grid = Grid::assemble(
        GridKind::Tube,
        ncols,
        nrows,
        hs,
        h,
        periodic,
        s_origin,
        1.0 / r,
        kappa_col,
        kappa_half,
        uniform,
        None,
    );
    if grid.min_jacobian <= 0.0 {
        return Err(Error::CurvatureTooLarge { min_jacobian: grid.min_jacobian, kappa_max: kmax });
    }
    Ok(Arc::new(grid))
}

impl Grid {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: GridKind,
        ncols: usize,
        nrows: usize,
        hs: f64,
        heta: f64,
        periodic: bool,
        s_origin: f64,
        inv_r: f64,
        kappa_col: Vec<f64>,
        kappa_half: Vec<f64>,
        uniform: bool,
        window: Option<WindowInfo>,
    ) -> Grid {
        let eta = |j: f64| -1.0 + (j + 1.0) * heta;
        let rs = heta / hs;
        let re = hs / heta;
        let mut cs = Vec::with_capacity(kappa_half.len() * nrows);
        for &k in &kappa_half {
            for j in 0..nrows {
                cs.push(rs / (1.0 - k * eta(j as f64) * inv_r));
            }
        }
        let mut ce = Vec::with_capacity(ncols * (nrows + 1));
        let mut mass = Vec::with_capacity(ncols * nrows);
        let mut min_j = f64::INFINITY;
        for &k in &kappa_col {
            for jh in 0..=nrows {
                ce.push(re * (1.0 - k * eta(jh as f64 - 0.5) * inv_r));
            }
            for j in 0..nrows {
                let jac = 1.0 - k * eta(j as f64) * inv_r;
                mass.push(jac * hs * heta);
            }
            // the Dirichlet rows bound the metric factor from below
            min_j = min_j.min(1.0 - k.abs() * inv_r);
        }
        Grid {
            kind,
            ncols,
            nrows,
            hs,
            heta,
            periodic,
            s_origin,
            inv_r,
            kappa_col,
            kappa_half,
            uniform,
            window,
            cs,
            ce,
            mass,
            min_jacobian: min_j,
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hs(&self) -> f64 {
        self.hs
    }

    pub fn heta(&self) -> f64 {
        self.heta
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    /// `1/R`; zero on the strip.
    pub fn inv_r(&self) -> f64 {
        self.inv_r
    }

    /// True when every column carries the same curvature.
    pub fn uniform(&self) -> bool {
        self.uniform
    }

    pub fn window_info(&self) -> Option<&WindowInfo> {
        self.window.as_ref()
    }

    pub fn min_jacobian(&self) -> f64 {
        self.min_jacobian
    }

    /// Total length in s of the domain (period for periodic grids).
    pub fn s_extent(&self) -> f64 {
        if self.periodic {
            self.ncols as f64 * self.hs
        } else {
            (self.ncols + 1) as f64 * self.hs
        }
    }

    #[inline]
    pub fn idx(&self, col: usize, row: usize) -> usize {
        col * self.nrows + row
    }

    pub fn s(&self, col: usize) -> f64 {
        self.s_origin + col as f64 * self.hs
    }

    pub fn s_origin(&self) -> f64 {
        self.s_origin
    }

    pub fn eta(&self, row: usize) -> f64 {
        -1.0 + (row as f64 + 1.0) * self.heta
    }

    pub fn kappa(&self, col: usize) -> f64 {
        self.kappa_col[col]
    }

    pub fn kappa_half(&self, half: usize) -> f64 {
        self.kappa_half[half]
    }

    /// Metric factor at an interior node.
    pub fn jacobian(&self, col: usize, row: usize) -> f64 {
        1.0 - self.kappa_col[col] * self.eta(row) * self.inv_r
    }

    /// Quadrature weights (`J hs heta`) of the unknown nodes.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub(crate) fn cs(&self, half: usize, row: usize) -> f64 {
        self.cs[half * self.nrows + row]
    }

    #[inline]
    pub(crate) fn ce(&self, col: usize, half_row: usize) -> f64 {
        self.ce[col * (self.nrows + 1) + half_row]
    }

    /// Index of the half column to the right of `col`, if it couples to an unknown.
    #[inline]
    pub(crate) fn right_half(&self, col: usize) -> usize {
        if self.periodic {
            (col + 1) % self.ncols
        } else {
            col + 1
        }
    }

    /// Sub-grid made of `count` consecutive columns starting at `start`,
    /// with Dirichlet conditions on both new ends.
    pub fn window(&self, start: usize, count: usize) -> Result<Arc<Grid>> {
        if count < 3 {
            return Err(Error::ResolutionError(format!("window of {count} columns is too short")));
        }
        if self.periodic {
            if count >= self.ncols || start >= self.ncols {
                return Err(Error::WindowOverflow(format!(
                    "window of {count} columns at {start} on a ring of {} columns",
                    self.ncols
                )));
            }
        } else if start + count > self.ncols {
            return Err(Error::WindowOverflow(format!(
                "columns {start}..{} exceed the {} available",
                start + count,
                self.ncols
            )));
        }
        let parent = |c: usize| if self.periodic { (start + c) % self.ncols } else { start + c };
        let kappa_col: Vec<f64> = (0..count).map(|c| self.kappa_col[parent(c)]).collect();
        let kappa_half: Vec<f64> = (0..=count)
            .map(|c| if self.periodic { self.kappa_half[(start + c) % self.ncols] } else { self.kappa_half[start + c] })
            .collect();
        let info = WindowInfo { start, parent_cols: self.ncols, parent_periodic: self.periodic };
        Ok(Arc::new(Grid::assemble(
            self.kind,
            count,
            self.nrows,
            self.hs,
            self.heta,
            false,
            self.s(start),
            self.inv_r,
            kappa_col,
            kappa_half,
            self.uniform,
            Some(info),
        )))
    }

    /// Parent column of window column `col`.
    pub fn parent_col(&self, col: usize) -> Option<usize> {
        self.window.as_ref().map(|w| if w.parent_periodic { (w.start + col) % w.parent_cols } else { w.start + col })
    }

    /// Same shape and spacing (not necessarily the same curvature data).
    pub fn same_shape(&self, other: &Grid) -> bool {
        self.ncols == other.ncols
            && self.nrows == other.nrows
            && self.hs == other.hs
            && self.heta == other.heta
            && self.periodic == other.periodic
    }
}

/// Values on the unknown nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ResolutionError(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::SolverDivergence(format!("non-finite field value at node {k}")));
        }
        Ok(GridField { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        GridField { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridField { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for c in 0..grid.ncols() {
            let s = grid.s(c);
            for j in 0..grid.nrows() {
                values.push(f(s, grid.eta(j)));
            }
        }
        GridField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.values[self.grid.idx(col, row)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, a: f64) -> GridField {
        self.map(|v| a * v)
    }

    /// `self + a * other`; both fields must share a grid.
    pub fn axpy(&self, a: f64, other: &GridField) -> GridField {
        assert!(self.grid.same_shape(&other.grid), "fields live on different grids");
        GridField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        }
    }

    /// Discrete L2 inner product with the metric weights.
    pub fn l2_dot(&self, other: &GridField) -> f64 {
        weighted_dot(self.grid.mass(), &self.values, &other.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_dot(self).sqrt()
    }

    /// Copies a window field into a zero field on the window's parent grid.
    pub fn embed_into(&self, parent: &Arc<Grid>) -> Result<GridField> {
        let mut out = GridField::zeros(parent.clone());
        self.add_into(&mut out.values, parent)?;
        Ok(out)
    }

    /// Adds this window field onto parent-grid values.
    pub fn add_into(&self, parent_values: &mut [f64], parent: &Grid) -> Result<()> {
        let info = self
            .grid
            .window_info()
            .ok_or_else(|| Error::ResolutionError("field does not live on a window".into()))?;
        if info.parent_cols != parent.ncols() || self.grid.nrows() != parent.nrows() {
            return Err(Error::ResolutionError("window does not belong to this grid".into()));
        }
        let nr = parent.nrows();
        for c in 0..self.grid.ncols() {
            let pc = self.grid.parent_col(c).expect("window");
            let src = &self.values[c * nr..(c + 1) * nr];
            let dst = &mut parent_values[pc * nr..(pc + 1) * nr];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        Ok(())
    }

    /// Restricts a parent field to a window grid.
    pub fn restrict_to(&self, window: &Arc<Grid>) -> Result<GridField> {
        let info = window
            .window_info()
            .ok_or_else(|| Error::ResolutionError("target grid is not a window".into()))?;
        if info.parent_cols != self.grid.ncols() || window.nrows() != self.grid.nrows() {
            return Err(Error::ResolutionError("window does not belong to this grid".into()));
        }
        let nr = window.nrows();
        let mut values = Vec::with_capacity(window.len());
        for c in 0..window.ncols() {
            let pc = window.parent_col(c).expect("window");
            values.extend_from_slice(&self.values[pc * nr..(pc + 1) * nr]);
        }
        Ok(GridField { grid: window.clone(), values })
    }
}

pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_curve, CurveSource};

    #[test]
    fn strip_node_counts() {
        let g = build_strip_grid(10.0, 0.05).unwrap();
        assert_eq!((g.ncols(), g.nrows()), (399, 39));
        let g = build_strip_grid(12.0, 0.1).unwrap();
        assert_eq!((g.ncols(), g.nrows()), (239, 19));
    }

    #[test]
    fn spacing_must_divide_width() {
        assert!(matches!(build_strip_grid(10.0, 0.3), Err(Error::ResolutionError(_))));
        assert!(matches!(build_strip_grid(10.03, 0.05), Err(Error::ResolutionError(_))));
    }

    #[test]
    fn circle_tube_metric() {
        let c = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        let g = build_tube_grid(&c, 20.0, 0.05).unwrap();
        assert!(g.periodic());
        assert!((g.s_extent() - 40.0 * std::f64::consts::PI).abs() < 1e-9);
        let mid = g.nrows() / 2;
        assert_eq!(g.eta(mid), 0.0);
        assert_eq!(g.jacobian(5, mid), 1.0);
        let half = (0..g.nrows()).find(|&j| (g.eta(j) - 0.5).abs() < 1e-12).unwrap();
        assert!((g.jacobian(7, half) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn tight_circle_is_rejected() {
        let c = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        assert!(matches!(build_tube_grid(&c, 0.5, 0.05), Err(Error::CurvatureTooLarge { .. })));
    }

    #[test]
    fn window_round_trip() {
        let c = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        let g = build_tube_grid(&c, 5.0, 0.1).unwrap();
        let f = GridField::from_fn(g.clone(), |s, eta| s + 10.0 * eta);
        let w = g.window(g.ncols() - 4, 10).unwrap();
        let fw = f.restrict_to(&w).unwrap();
        assert_eq!(fw.at(0, 3), f.at(g.ncols() - 4, 3));
        assert_eq!(fw.at(5, 3), f.at(1, 3));
        let back = fw.embed_into(&g).unwrap();
        assert_eq!(back.at(1, 3), f.at(1, 3));
        assert_eq!(back.at(20, 3), 0.0);
    }
}
