//! Jacobi-preconditioned conjugate gradients for `K + sigma M`.
//!
//! Kept as an independent route to the factored solver.

use super::grid::Grid;
use super::operator::apply_shifted;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn pcg_solve(grid: &Grid, sigma: f64, b: &[f64], rtol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = grid.len();
    let diag = diagonal(grid, sigma);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        apply_shifted(grid, sigma, None, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::IndefiniteOperator { pivot: it, value: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / bnorm;
        if rel <= rtol {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rel });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDivergence(format!("conjugate gradients stalled after {max_iter} iterations")))
}

fn diagonal(grid: &Grid, sigma: f64) -> Vec<f64> {
    let nr = grid.nrows();
    let m = grid.mass();
    let mut d = vec![0.0; grid.len()];
    for c in 0..grid.ncols() {
        let hl = c;
        let hr = grid.right_half(c);
        for j in 0..nr {
            d[c * nr + j] =
                grid.cs(hl, j) + grid.cs(hr, j) + grid.ce(c, j) + grid.ce(c, j + 1) + sigma * m[c * nr + j];
        }
    }
    d
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::build_strip_grid;
    use crate::pde::operator::ShiftedOperator;

    #[test]
    fn agrees_with_direct_solver() {
        let g = build_strip_grid(4.0, 0.1).unwrap();
        let b: Vec<f64> = (0..g.len()).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let cg = pcg_solve(&g, 1.0, &b, 1e-13, 5000).unwrap();
        let direct = ShiftedOperator::helmholtz(g.clone(), 1.0).unwrap().solve_raw(&b);
        let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, c) in cg.x.iter().zip(&direct) {
            assert!((a - c).abs() < 1e-10 * scale);
        }
    }
}
