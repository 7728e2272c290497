//! Sign-definite ground states of `-Delta U + lambda U = f(U)` on the strip.

use super::nonlinearity::{NonlinearityKind, NonlinearitySpec};
use crate::error::{Error, Result};
use crate::pde::grid::{Grid, GridField, GridKind};
use crate::pde::operator::{apply_shifted, ShiftedOperator};
use std::f64::consts::PI;
use std::sync::Arc;

/// First Dirichlet eigenvalue of the cross-section (-1, 1).
pub const LAMBDA_11: f64 = PI * PI / 4.0;
/// Residual demanded from a converged profile.
pub const PROFILE_RESIDUAL_TOL: f64 = 1e-9;

const MAX_NEWTON: usize = 60;

/// Decay rate `sqrt(lambda + pi^2/4)` of the profile tails.
pub fn decay_rate_exact(lambda: f64) -> f64 {
    (lambda + LAMBDA_11).sqrt()
}

/// Shortest strip half-length accepted for a given decay rate.
pub fn min_strip_half_length(mu: f64) -> f64 {
    8.0 / mu
}

/// Default strip half-length: long enough to hold a `25/mu` window plus one unit.
pub fn default_strip_half_length(mu: f64, h: f64) -> f64 {
    let l = (25.0 / mu + 1.0).max(10.0);
    (l / h - 1e-9).ceil() * h
}

#[derive(Debug, Clone)]
pub struct BumpProfile {
    sign: i8,
    nl: NonlinearitySpec,
    lambda: f64,
    field: GridField,
    energy: f64,
    residual: f64,
    newton_steps: usize,
}

impl BumpProfile {
    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn nonlinearity(&self) -> &NonlinearitySpec {
        &self.nl
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Analytic decay rate `sqrt(lambda + pi^2/4)`.
    pub fn mu(&self) -> f64 {
        decay_rate_exact(self.lambda)
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.field.grid()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn newton_steps(&self) -> usize {
        self.newton_steps
    }

    /// Half-length of the strip the profile was computed on.
    pub fn half_length(&self) -> f64 {
        -self.grid().s_origin() + self.grid().hs()
    }

    pub fn center_col(&self) -> usize {
        self.grid().ncols() / 2
    }

    pub fn center_row(&self) -> usize {
        self.grid().nrows() / 2
    }

    pub fn peak(&self) -> f64 {
        self.field.at(self.center_col(), self.center_row())
    }

    /// `sqrt(a(U, U))`, the norm that sets the trust region of the reduction.
    pub fn a_norm(&self) -> f64 {
        let g = self.grid();
        let mut y = vec![0.0; g.len()];
        apply_shifted(g, self.lambda, None, self.field.values(), &mut y);
        y.iter().zip(self.field.values()).map(|(a, b)| a * b).sum::<f64>().sqrt()
    }
}

/// Energy `1/2 u^T (K + lambda M) u - sum M F(u)` on any grid.
pub fn field_energy(field: &GridField, lambda: f64, nl: &NonlinearitySpec) -> f64 {
    let g = field.grid();
    let u = field.values();
    let mut y = vec![0.0; g.len()];
    apply_shifted(g, lambda, None, u, &mut y);
    let quad: f64 = y.iter().zip(u).map(|(a, b)| a * b).sum();
    let pot: f64 = u.iter().zip(g.mass()).map(|(v, m)| m * nl.big_f(*v)).sum();
    0.5 * quad - pot
}

/// `max |(-Delta_h + lambda) u - f(u)|` over the unknown nodes.
pub fn pde_residual(field: &GridField, lambda: f64, nl: &NonlinearitySpec) -> f64 {
    let g = field.grid();
    let u = field.values();
    let mut y = vec![0.0; g.len()];
    apply_shifted(g, lambda, None, u, &mut y);
    y.iter()
        .zip(u)
        .zip(g.mass())
        .fold(0.0f64, |acc, ((a, v), m)| acc.max((a / m - nl.f(*v)).abs()))
}

fn check_strip(grid: &Grid, lambda: f64) -> Result<()> {
    if !(lambda > -LAMBDA_11) {
        return Err(Error::Hypothesis(format!(
            "lambda = {lambda} violates lambda > -pi^2/4 = {:.6}",
            -LAMBDA_11
        )));
    }
    if grid.kind() != GridKind::Strip || grid.window_info().is_some() {
        return Err(Error::ResolutionError("ground states are computed on a full strip grid".into()));
    }
    if grid.ncols() % 2 == 0 || grid.nrows() % 2 == 0 {
        return Err(Error::ResolutionError("strip grid must have a node at the origin".into()));
    }
    let half = -grid.s_origin() + grid.hs();
    let mu = decay_rate_exact(lambda);
    if half < min_strip_half_length(mu) - 1e-9 {
        return Err(Error::ResolutionError(format!(
            "strip half-length {half} below 8/mu = {:.4}",
            min_strip_half_length(mu)
        )));
    }
    Ok(())
}

/// Average over the reflections `xi -> -xi` and `eta -> -eta`.
pub fn symmetrize(grid: &Grid, u: &mut [f64]) {
    let (nc, nr) = (grid.ncols(), grid.nrows());
    for c in 0..=(nc / 2) {
        let cr = nc - 1 - c;
        for j in 0..=(nr / 2) {
            let jr = nr - 1 - j;
            let idx = [c * nr + j, cr * nr + j, c * nr + jr, cr * nr + jr];
            let avg = 0.25 * (u[idx[0]] + u[idx[1]] + u[idx[2]] + u[idx[3]]);
            for i in idx {
                u[i] = avg;
            }
        }
    }
}

/// Newton iteration on `(K + lambda M) u - M f(u) = 0`, symmetrized each step.
pub fn newton_polish(
    grid: &Arc<Grid>,
    lambda: f64,
    nl: &NonlinearitySpec,
    mut u: Vec<f64>,
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let m = grid.mass().to_vec();
    let n = u.len();
    let residual_vec = |u: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        apply_shifted(grid, lambda, None, u, &mut y);
        for i in 0..n {
            y[i] -= m[i] * nl.f(u[i]);
        }
        y
    };
    let scaled_norm = |r: &[f64]| r.iter().zip(&m).fold(0.0f64, |acc, (a, w)| acc.max((a / w).abs()));
    let scale = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut r = residual_vec(&u);
    let mut rn = scaled_norm(&r);
    for step in 0..MAX_NEWTON {
        if rn <= tol {
            return Ok((u, step));
        }
        let pot: Vec<f64> = u.iter().map(|&v| -nl.df(v)).collect();
        let jac = ShiftedOperator::new(grid.clone(), lambda, Some(pot))?;
        let delta = jac.solve_raw(&r);
        let mut t = 1.0;
        loop {
            let mut cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - t * d).collect();
            symmetrize(grid, &mut cand);
            let rc = residual_vec(&cand);
            let rcn = scaled_norm(&rc);
            if rcn.is_finite() && (rcn < rn || t < 1.0 / 64.0) {
                u = cand;
                r = rc;
                rn = rcn;
                break;
            }
            t *= 0.5;
        }
        let umax = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if umax < 1e-6 * scale.max(1.0) {
            return Err(Error::CollapseToZero(umax));
        }
        if !umax.is_finite() || umax > 1e8 {
            return Err(Error::NewtonDivergence(format!("iterate blew up to {umax:.3e}")));
        }
    }
    if rn <= tol {
        Ok((u, MAX_NEWTON))
    } else {
        Err(Error::NewtonDivergence(format!("residual {rn:.3e} after {MAX_NEWTON} steps")))
    }
}

/// `cos(pi eta / 2) exp(-mu xi^2 / 2)` scaled so that `a(u,u) = sum M f(u) u`.
fn initial_guess(grid: &Grid, lambda: f64, p: f64, sign: f64) -> Vec<f64> {
    let mu = decay_rate_exact(lambda);
    let mut phi = Vec::with_capacity(grid.len());
    for c in 0..grid.ncols() {
        let xi = grid.s(c);
        for j in 0..grid.nrows() {
            phi.push((0.5 * PI * grid.eta(j)).cos() * (-0.5 * mu * xi * xi).exp());
        }
    }
    let mut y = vec![0.0; phi.len()];
    apply_shifted(grid, lambda, None, &phi, &mut y);
    let quad: f64 = y.iter().zip(&phi).map(|(a, b)| a * b).sum();
    let lp: f64 = phi.iter().zip(grid.mass()).map(|(v, w)| w * v.abs().powf(p + 1.0)).sum();
    let amp = (quad / lp).powf(1.0 / (p - 1.0));
    phi.into_iter().map(|v| sign * amp * v).collect()
}

fn positive_power_state(grid: &Arc<Grid>, lambda: f64, p: f64) -> Result<Vec<f64>> {
    let nl = NonlinearitySpec::new(NonlinearityKind::Power { p })?;
    let tol = 0.05 * PROFILE_RESIDUAL_TOL;
    let direct = newton_polish(grid, lambda, &nl, initial_guess(grid, lambda, p, 1.0), tol);
    match direct {
        Ok((u, _)) if u.iter().all(|v| *v > 0.0) => return Ok(u),
        Ok(_) if p == 3.0 => return Err(Error::NewtonDivergence("Newton left the positive cone".into())),
        Err(e) if p == 3.0 => return Err(e),
        _ => {}
    }
    // continuation in the exponent, starting from the cubic problem
    let mut last_err = Error::NewtonDivergence(format!("no ground state found for p = {p}"));
    for pieces in [4usize, 8, 16] {
        let cubic = NonlinearitySpec::cubic();
        let (mut u, _) = newton_polish(grid, lambda, &cubic, initial_guess(grid, lambda, 3.0, 1.0), tol)?;
        let mut ok = true;
        for k in 1..=pieces {
            let pk = 3.0 + (p - 3.0) * k as f64 / pieces as f64;
            let nk = NonlinearitySpec::new(NonlinearityKind::Power { p: pk })?;
            // rescale the previous state onto the Nehari manifold of the new exponent
            let mut y = vec![0.0; u.len()];
            apply_shifted(grid, lambda, None, &u, &mut y);
            let quad: f64 = y.iter().zip(&u).map(|(a, b)| a * b).sum();
            let lp: f64 = u.iter().zip(grid.mass()).map(|(v, w)| w * v.abs().powf(pk + 1.0)).sum();
            let s = (quad / lp).powf(1.0 / (pk - 1.0));
            let guess: Vec<f64> = u.iter().map(|v| s * v).collect();
            match newton_polish(grid, lambda, &nk, guess, tol) {
                Ok((next, _)) => u = next,
                Err(e) => {
                    last_err = e;
                    ok = false;
                    break;
                }
            }
        }
        if ok && u.iter().all(|v| *v > 0.0) {
            return Ok(u);
        }
    }
    Err(last_err)
}

/// Computes `U+` (sign = 1) or `U-` (sign = -1) on a full strip grid.
pub fn solve_ground_state(nl: &NonlinearitySpec, lambda: f64, sign: i8, grid: &Arc<Grid>) -> Result<BumpProfile> {
    check_strip(grid, lambda)?;
    if sign != 1 && sign != -1 {
        return Err(Error::RangeViolation(format!("sign must be +1 or -1, got {sign}")));
    }
    let p = nl.exponent(sign);
    // a sign-definite solution only sees one branch of f, so it is the
    // (possibly negated) positive ground state of that pure power
    let base = positive_power_state(grid, lambda, p)?;
    let guess: Vec<f64> = base.into_iter().map(|v| sign as f64 * v).collect();
    let (u, steps) = newton_polish(grid, lambda, nl, guess, 0.05 * PROFILE_RESIDUAL_TOL)?;
    finish_profile(grid, lambda, nl, sign, u, steps)
}

/// Validates and packages a converged profile.
pub(crate) fn finish_profile(
    grid: &Arc<Grid>,
    lambda: f64,
    nl: &NonlinearitySpec,
    sign: i8,
    u: Vec<f64>,
    steps: usize,
) -> Result<BumpProfile> {
    let field = GridField::new(grid.clone(), u)?;
    let residual = pde_residual(&field, lambda, nl);
    if !(residual <= PROFILE_RESIDUAL_TOL) {
        return Err(Error::NewtonDivergence(format!("profile residual {residual:.3e}")));
    }
    if let Some(k) = field.values().iter().position(|v| (*v) * sign as f64 <= 0.0) {
        return Err(Error::NewtonDivergence(format!("profile is not sign-definite at node {k}")));
    }
    let energy = field_energy(&field, lambda, nl);
    let profile = BumpProfile { sign, nl: *nl, lambda, field, energy, residual, newton_steps: steps };
    let (cc, cr) = (profile.center_col(), profile.center_row());
    let peak = profile.peak().abs();
    if profile.field.values().iter().any(|v| v.abs() > peak) {
        return Err(Error::NewtonDivergence(format!("profile peak is not at the origin ({cc}, {cr})")));
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::build_strip_grid;

    #[test]
    fn cubic_ground_state_is_positive_even_and_critical() {
        let g = build_strip_grid(8.0, 0.1).unwrap();
        let nl = NonlinearitySpec::cubic();
        let up = solve_ground_state(&nl, 1.0, 1, &g).unwrap();
        assert!(up.residual() <= PROFILE_RESIDUAL_TOL);
        assert!(up.energy() > 0.0);
        let um = solve_ground_state(&nl, 1.0, -1, &g).unwrap();
        for (a, b) in up.field().values().iter().zip(um.field().values()) {
            assert!((a + b).abs() <= 1e-10);
        }
        // reflection symmetry
        let (nc, nr) = (g.ncols(), g.nrows());
        for c in 0..nc {
            for j in 0..nr {
                assert!((up.field().at(c, j) - up.field().at(nc - 1 - c, nr - 1 - j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lambda_below_cross_section_floor_is_rejected() {
        let g = build_strip_grid(8.0, 0.1).unwrap();
        let err = solve_ground_state(&NonlinearitySpec::cubic(), -3.0, 1, &g).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }

    #[test]
    fn short_strip_is_rejected() {
        let g = build_strip_grid(3.0, 0.1).unwrap();
        assert!(matches!(
            solve_ground_state(&NonlinearitySpec::cubic(), 1.0, 1, &g),
            Err(Error::ResolutionError(_))
        ));
    }

    #[test]
    fn default_half_length_is_grid_aligned() {
        let l = default_strip_half_length(decay_rate_exact(1.0), 0.05);
        assert!((l / 0.05 - (l / 0.05).round()).abs() < 1e-9);
        assert!(l >= 25.0 / decay_rate_exact(1.0) + 1.0);
    }
}
