//! Smallest eigenpairs of `-Delta_h + potential` by shift-invert
//! Krylov-Schur (thick-restart Arnoldi in the mass inner product).

use super::grid::{weighted_dot, Grid, GridField};
use super::operator::{apply_shifted, ShiftedOperator};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const MAX_EIGENPAIRS: usize = 10;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// normalized in the discrete L2 norm
    pub field: GridField,
    /// `|| (-Delta_h + potential) v - value v ||` in the discrete L2 norm
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-9, max_restarts: 300, seed: 0x5eed }
    }
}

pub fn smallest_eigenpairs(grid: &Arc<Grid>, potential: Option<&GridField>, k: usize) -> Result<Vec<EigenPair>> {
    smallest_eigenpairs_with(grid, potential, k, EigenOptions::default())
}

pub fn smallest_eigenpairs_with(
    grid: &Arc<Grid>,
    potential: Option<&GridField>,
    k: usize,
    opts: EigenOptions,
) -> Result<Vec<EigenPair>> {
    if k == 0 || k > MAX_EIGENPAIRS {
        return Err(Error::RangeViolation(format!("between 1 and {MAX_EIGENPAIRS} eigenpairs, got {k}")));
    }
    if k >= grid.len() {
        return Err(Error::RangeViolation(format!("{k} eigenpairs requested on {} nodes", grid.len())));
    }
    let pot: Option<Vec<f64>> = potential.map(|p| p.values().to_vec());
    if let Some(p) = &pot {
        if p.len() != grid.len() {
            return Err(Error::ResolutionError("potential does not match the grid".into()));
        }
    }
    let pmin = pot.as_ref().map_or(0.0, |p| p.iter().cloned().fold(0.0, f64::min));

    // phase 1: safe shift below the spectrum, loose tolerance, one extra pair
    let k1 = (k + 1).min(grid.len() - 1);
    let sigma0 = pmin - 1.0;
    let op0 = ShiftedOperator::new(grid.clone(), -sigma0, pot.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rough = krylov_schur(&op0, sigma0, pot.as_deref(), k1, start, 1e-4, opts.max_restarts)?;

    // phase 2: shift just below the first eigenvalue
    let theta1 = rough[0].0;
    let gap = rough[1].0 - theta1;
    let delta = (0.5 * gap).max(1e-6 * (1.0 + theta1.abs()));
    let sigma1 = theta1 - delta;
    let mut start: Vec<f64> = vec![0.0; grid.len()];
    for (_, v) in rough.iter().take(k) {
        for (s, x) in start.iter_mut().zip(v) {
            *s += x;
        }
    }
    for s in start.iter_mut() {
        *s += 1e-3 * rng.gen_range(-1.0..1.0);
    }
    let refined = match ShiftedOperator::new(grid.clone(), -sigma1, pot.clone()) {
        Ok(op1) if op1.negative_count() == 0 => {
            krylov_schur(&op1, sigma1, pot.as_deref(), k, start, opts.tol, opts.max_restarts)?
        }
        _ => krylov_schur(&op0, sigma0, pot.as_deref(), k, start, opts.tol, opts.max_restarts)?,
    };

    let m = grid.mass();
    let mut out = Vec::with_capacity(k);
    for (theta, mut v) in refined.into_iter().take(k) {
        // deterministic sign: largest entry positive
        let imax = v.iter().enumerate().fold(0, |b, (i, x)| if x.abs() > v[b].abs() { i } else { b });
        if v[imax] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let residual = true_residual(grid, pot.as_deref(), theta, &v, m);
        if !(residual <= 1e-8) {
            return Err(Error::ConvergenceFailure(format!(
                "eigenpair {theta:.6} has residual {residual:.3e}"
            )));
        }
        out.push(EigenPair { value: theta, field: GridField::new(grid.clone(), v)?, residual });
    }
    Ok(out)
}

fn true_residual(grid: &Grid, pot: Option<&[f64]>, theta: f64, v: &[f64], m: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    apply_shifted(grid, 0.0, pot, v, &mut av);
    let mut s = 0.0;
    for i in 0..v.len() {
        let r = av[i] / m[i] - theta * v[i];
        s += m[i] * r * r;
    }
    s.sqrt()
}

/// Thick-restart Arnoldi on `T = (A - sigma M)^{-1} M`, which is self-adjoint in
/// the mass inner product. Returns the `k` eigenvalues of `A v = theta M v`
/// closest to `sigma` from above, ascending, with M-orthonormal vectors.
fn krylov_schur(
    op: &ShiftedOperator,
    sigma: f64,
    pot: Option<&[f64]>,
    k: usize,
    start: Vec<f64>,
    tol: f64,
    max_restarts: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let grid = op.grid().clone();
    let n = grid.len();
    let m = grid.mass().to_vec();
    let dim = (2 * k + 20).max(30).min(n);
    let keep = (k + (dim - k) / 2).min(dim - 1);
    let apply_t = |x: &[f64]| -> Vec<f64> {
        let b: Vec<f64> = x.iter().zip(&m).map(|(a, w)| a * w).collect();
        op.solve_raw(&b)
    };
    let mnorm = |x: &[f64]| weighted_dot(&m, x, x).sqrt();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let s0 = mnorm(&start);
    if !(s0 > 0.0) {
        return Err(Error::ConvergenceFailure("zero starting vector".into()));
    }
    basis.push(start.iter().map(|x| x / s0).collect());
    let mut h = DMatrix::<f64>::zeros(dim + 1, dim);
    let mut first = 0;
    let mut restarts = 0;
    loop {
        let mut active = dim;
        for j in first..dim {
            let mut w = apply_t(&basis[j]);
            for _pass in 0..2 {
                for i in 0..=j {
                    let c = weighted_dot(&m, &basis[i], &w);
                    h[(i, j)] += c;
                    for (wl, bl) in w.iter_mut().zip(&basis[i]) {
                        *wl -= c * bl;
                    }
                }
            }
            let beta = mnorm(&w);
            h[(j + 1, j)] = beta;
            if beta <= 1e-14 * h[(j, j)].abs().max(1e-300) {
                active = j + 1;
                break;
            }
            basis.push(w.into_iter().map(|x| x / beta).collect());
        }
        if active < k {
            return Err(Error::ConvergenceFailure(format!("Krylov space collapsed to dimension {active}")));
        }

        let mut s = DMatrix::<f64>::zeros(active, active);
        for i in 0..active {
            for j in 0..active {
                s[(i, j)] = 0.5 * (h[(i, j)] + h[(j, i)]);
            }
        }
        let eig = s.symmetric_eigen();
        let mut order: Vec<usize> = (0..active).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let beta = if active < dim || basis.len() <= active { 0.0 } else { h[(active, active - 1)] };

        let ritz = |idx: usize| -> Vec<f64> {
            let mut x = vec![0.0; n];
            for l in 0..active {
                let y = eig.eigenvectors[(l, idx)];
                if y != 0.0 {
                    for (xi, bi) in x.iter_mut().zip(&basis[l]) {
                        *xi += y * bi;
                    }
                }
            }
            x
        };

        let estimates_ok = order.iter().take(k).all(|&idx| {
            let nu = eig.eigenvalues[idx];
            let est = (beta * eig.eigenvectors[(active - 1, idx)]).abs();
            nu > 0.0 && est <= 1e-2 * tol * nu
        });
        let mut converged = estimates_ok || beta == 0.0;
        let mut pairs = Vec::new();
        if converged || restarts >= max_restarts {
            for &idx in order.iter().take(k) {
                let nu = eig.eigenvalues[idx];
                let theta = sigma + 1.0 / nu;
                let x = ritz(idx);
                if true_residual(&grid, pot, theta, &x, &m) > tol {
                    converged = false;
                }
                pairs.push((theta, x));
            }
        }
        if converged || (restarts >= max_restarts && tol >= 1e-4) {
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            return Ok(pairs);
        }
        if restarts >= max_restarts {
            return Err(Error::ConvergenceFailure(format!("no convergence after {max_restarts} restarts")));
        }
        restarts += 1;

        // thick restart: keep the leading Ritz vectors and the residual direction
        let p = keep.min(active - 1).max(k);
        let mut new_basis: Vec<Vec<f64>> = order.iter().take(p).map(|&idx| ritz(idx)).collect();
        let mut new_h = DMatrix::<f64>::zeros(dim + 1, dim);
        for (i, &idx) in order.iter().take(p).enumerate() {
            new_h[(i, i)] = eig.eigenvalues[idx];
            new_h[(p, i)] = beta * eig.eigenvectors[(active - 1, idx)];
        }
        if beta > 0.0 {
            new_basis.push(basis[active].clone());
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(restarts as u64);
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for b in &new_basis {
                    let c = weighted_dot(&m, b, &v);
                    for (vl, bl) in v.iter_mut().zip(b) {
                        *vl -= c * bl;
                    }
                }
            }
            let nv = mnorm(&v);
            new_basis.push(v.into_iter().map(|x| x / nv).collect());
        }
        basis = new_basis;
        h = new_h;
        first = p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::build_strip_grid;

    #[test]
    fn strip_modes_match_separable_formula() {
        // eigenvalues of the 5-point operator on a rectangle are sums of 1-D ones
        let l = 2.0;
        let h = 0.1;
        let g = build_strip_grid(l, h).unwrap();
        let pairs = smallest_eigenpairs(&g, None, 3).unwrap();
        let one_d = |m: usize, len: f64| {
            let s = (m as f64 * std::f64::consts::PI * h / (2.0 * len)).sin();
            4.0 / (h * h) * s * s
        };
        let mut exact: Vec<f64> = Vec::new();
        for a in 1..5 {
            for b in 1..4 {
                exact.push(one_d(a, 2.0 * l) + one_d(b, 2.0));
            }
        }
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (p, e) in pairs.iter().zip(&exact) {
            assert!((p.value - e).abs() < 1e-9, "{} vs {}", p.value, e);
            assert!(p.residual <= 1e-8);
            assert!((p.field.l2_norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_too_many_pairs() {
        let g = build_strip_grid(2.0, 0.1).unwrap();
        assert!(smallest_eigenpairs(&g, None, 11).is_err());
    }
}
