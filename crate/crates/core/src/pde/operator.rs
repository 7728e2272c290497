//! The divergence-form Dirichlet operator and linear solves.
//!
//! With `K` the symmetric stiffness matrix and `M = diag(J hs heta)` the
//! lumped mass, the discrete operator is `-Delta_h = M^{-1} K`. Solving
//! `(-Delta_h + lambda) u = f` is therefore the symmetric system
//! `(K + lambda M) u = M f`.

use super::banded::{BandMatrix, LdlFactor};
use super::grid::{Grid, GridField};
use crate::error::{Error, Result};
use std::sync::Arc;

/// Relative residual demanded from every linear solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// Column neighbors of `col` as (half index, neighbor column if unknown).
#[inline]
fn neighbors(grid: &Grid, col: usize) -> [(usize, Option<usize>); 2] {
    let n = grid.ncols();
    if grid.periodic() {
        [(col, Some((col + n - 1) % n)), ((col + 1) % n, Some((col + 1) % n))]
    } else {
        [
            (col, if col > 0 { Some(col - 1) } else { None }),
            (col + 1, if col + 1 < n { Some(col + 1) } else { None }),
        ]
    }
}

/// `y = K x`.
pub fn apply_stiffness(grid: &Grid, x: &[f64], y: &mut [f64]) {
    let nr = grid.nrows();
    for c in 0..grid.ncols() {
        let [(hl, left), (hr, right)] = neighbors(grid, c);
        for j in 0..nr {
            let i = c * nr + j;
            let (a_l, a_r) = (grid.cs(hl, j), grid.cs(hr, j));
            let (a_d, a_u) = (grid.ce(c, j), grid.ce(c, j + 1));
            let mut v = (a_l + a_r + a_d + a_u) * x[i];
            if let Some(l) = left {
                v -= a_l * x[l * nr + j];
            }
            if let Some(r) = right {
                v -= a_r * x[r * nr + j];
            }
            if j > 0 {
                v -= a_d * x[i - 1];
            }
            if j + 1 < nr {
                v -= a_u * x[i + 1];
            }
            y[i] = v;
        }
    }
}

/// `y = (K + sigma M + M diag(potential)) x`.
pub fn apply_shifted(grid: &Grid, sigma: f64, potential: Option<&[f64]>, x: &[f64], y: &mut [f64]) {
    apply_stiffness(grid, x, y);
    let m = grid.mass();
    match potential {
        Some(p) => {
            for i in 0..y.len() {
                y[i] += m[i] * (sigma + p[i]) * x[i];
            }
        }
        None => {
            for i in 0..y.len() {
                y[i] += m[i] * sigma * x[i];
            }
        }
    }
}

/// `(-Delta_h + lambda) u` as a field.
pub fn apply_helmholtz(u: &GridField, lambda: f64) -> GridField {
    let g = u.grid();
    let mut y = vec![0.0; g.len()];
    apply_shifted(g, lambda, None, u.values(), &mut y);
    for (v, m) in y.iter_mut().zip(g.mass()) {
        *v /= m;
    }
    GridField::from_parts(g.clone(), y)
}

/// Elimination order of the columns: natural on open grids, folded
/// (0, n-1, 1, n-2, ...) on periodic ones so the wrap-around coupling stays
/// inside a band of two columns.
fn column_order(grid: &Grid) -> Vec<usize> {
    let n = grid.ncols();
    if !grid.periodic() {
        return (0..n).collect();
    }
    (0..n).map(|p| if p % 2 == 0 { p / 2 } else { n - 1 - p / 2 }).collect()
}

/// `K + sigma M + M diag(potential)` in factored form, with its inertia.
#[derive(Debug)]
pub struct ShiftedOperator {
    grid: Arc<Grid>,
    sigma: f64,
    potential: Option<Vec<f64>>,
    /// position of each column in the elimination order
    col_pos: Vec<usize>,
    factor: LdlFactor,
}

impl ShiftedOperator {
    /// Factors the operator, accepting indefinite matrices.
    pub fn new(grid: Arc<Grid>, sigma: f64, potential: Option<Vec<f64>>) -> Result<Self> {
        if let Some(p) = &potential {
            if p.len() != grid.len() {
                return Err(Error::ResolutionError("potential does not match the grid".into()));
            }
        }
        let nr = grid.nrows();
        let order = column_order(&grid);
        let mut col_pos = vec![0; grid.ncols()];
        for (p, &c) in order.iter().enumerate() {
            col_pos[c] = p;
        }
        let span = if grid.periodic() { 2 } else { 1 };
        let mut band = BandMatrix::zeros(grid.len(), span * nr);
        let m = grid.mass();
        for c in 0..grid.ncols() {
            let [(hl, left), (hr, right)] = neighbors(&grid, c);
            let pc = col_pos[c];
            for j in 0..nr {
                let i = c * nr + j;
                let row = pc * nr + j;
                let (a_l, a_r) = (grid.cs(hl, j), grid.cs(hr, j));
                let (a_d, a_u) = (grid.ce(c, j), grid.ce(c, j + 1));
                let pot = potential.as_ref().map_or(0.0, |p| p[i]);
                band.add(row, row, a_l + a_r + a_d + a_u + m[i] * (sigma + pot));
                // each off-diagonal pair is entered once, from its lower-indexed side
                if let Some(r) = right {
                    if col_pos[r] < pc {
                        band.add(row, col_pos[r] * nr + j, -a_r);
                    }
                }
                if let Some(l) = left {
                    if col_pos[l] < pc {
                        band.add(row, col_pos[l] * nr + j, -a_l);
                    }
                }
                if j > 0 {
                    band.add(row, row - 1, -a_d);
                }
            }
        }
        let factor = band.factor()?;
        Ok(ShiftedOperator { grid, sigma, potential, col_pos, factor })
    }

    /// Factors `K + lambda M`, requiring positive definiteness.
    pub fn helmholtz(grid: Arc<Grid>, lambda: f64) -> Result<Self> {
        let op = ShiftedOperator::new(grid, lambda, None)?;
        if let Some((pivot, value)) = op.factor.first_negative_pivot() {
            return Err(Error::IndefiniteOperator { pivot, value });
        }
        Ok(op)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of negative eigenvalues of the factored matrix, which equals the
    /// number of eigenvalues of `-Delta_h + potential` below `-sigma`.
    pub fn negative_count(&self) -> usize {
        self.factor.negative_pivots()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        apply_shifted(&self.grid, self.sigma, self.potential.as_deref(), x, y);
    }

    fn solve_permuted(&self, b: &[f64]) -> Vec<f64> {
        let nr = self.grid.nrows();
        let mut work = vec![0.0; b.len()];
        for (c, &p) in self.col_pos.iter().enumerate() {
            work[p * nr..(p + 1) * nr].copy_from_slice(&b[c * nr..(c + 1) * nr]);
        }
        self.factor.solve_in_place(&mut work);
        let mut x = vec![0.0; b.len()];
        for (c, &p) in self.col_pos.iter().enumerate() {
            x[c * nr..(c + 1) * nr].copy_from_slice(&work[p * nr..(p + 1) * nr]);
        }
        x
    }

    /// Solves `A x = b` for the factored matrix `A`, with iterative refinement.
    pub fn solve_raw(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve_permuted(b);
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if bn == 0.0 {
            return x;
        }
        let mut r = vec![0.0; b.len()];
        for _ in 0..3 {
            self.apply(&x, &mut r);
            let mut rn: f64 = 0.0;
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
                rn = rn.max(ri.abs());
            }
            if rn <= 1e-14 * bn {
                break;
            }
            let dx = self.solve_permuted(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        x
    }

    /// Solves `(-Delta_h + sigma + potential) u = rhs` and checks the residual.
    pub fn solve(&self, rhs: &GridField) -> Result<GridField> {
        if !rhs.grid().same_shape(&self.grid) {
            return Err(Error::ResolutionError("right-hand side lives on another grid".into()));
        }
        let m = self.grid.mass();
        let b: Vec<f64> = rhs.values().iter().zip(m).map(|(f, w)| f * w).collect();
        let x = self.solve_raw(&b);
        let mut ax = vec![0.0; x.len()];
        self.apply(&x, &mut ax);
        let scale = rhs.max_abs();
        let res = ax.iter().zip(&b).zip(m).fold(0.0f64, |acc, ((a, b), w)| acc.max((a - b).abs() / w));
        if !(res <= SOLVE_TOL * scale) && res > 0.0 {
            return Err(Error::SolverDivergence(format!("residual {res:.3e} against right-hand side {scale:.3e}")));
        }
        GridField::new(self.grid.clone(), x)
    }
}

/// Solves `(-Delta_h + lambda) u = rhs` with homogeneous Dirichlet data.
pub fn solve_linear(grid: &Arc<Grid>, lambda: f64, rhs: &GridField) -> Result<GridField> {
    ShiftedOperator::helmholtz(grid.clone(), lambda)?.solve(rhs)
}

/// `a(u, v) = u^T (K + lambda M) v`, the discrete form of the integral of
/// `grad u . grad v + lambda u v`.
pub fn a_inner(grid: &Grid, lambda: f64, u: &[f64], v: &[f64]) -> f64 {
    let mut y = vec![0.0; u.len()];
    apply_shifted(grid, lambda, None, v, &mut y);
    u.iter().zip(&y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_curve, CurveSource};
    use crate::pde::grid::{build_strip_grid, build_tube_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn factored_solve_inverts_apply_on_ring() {
        let c = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        let g = build_tube_grid(&c, 3.0, 0.1).unwrap();
        let op = ShiftedOperator::helmholtz(g.clone(), 1.0).unwrap();
        let x = random(g.len(), 1);
        let mut b = vec![0.0; g.len()];
        op.apply(&x, &mut b);
        let y = op.solve_raw(&b);
        for i in 0..x.len() {
            assert!((x[i] - y[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = build_strip_grid(3.0, 0.1).unwrap();
        let u = solve_linear(&g, 1.0, &GridField::zeros(g.clone())).unwrap();
        assert!(u.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn very_negative_shift_is_indefinite() {
        let g = build_strip_grid(3.0, 0.1).unwrap();
        assert!(matches!(ShiftedOperator::helmholtz(g, -3.0), Err(Error::IndefiniteOperator { .. })));
    }

    #[test]
    fn inertia_counts_modes_below_shift() {
        // strip eigenvalues: (pi/2)^2 (1 + ...) for the first few modes
        let g = build_strip_grid(3.0, 0.1).unwrap();
        let op = ShiftedOperator::new(g.clone(), -2.0, None).unwrap();
        assert_eq!(op.negative_count(), 0);
        let op = ShiftedOperator::new(g, -2.8, None).unwrap();
        assert!(op.negative_count() >= 1);
    }
}
