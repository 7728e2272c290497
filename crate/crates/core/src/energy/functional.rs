//! The energy `J(u) = 1/2 a(u, u) - integral F(u)` on a grid, its gradient in
//! the a-inner product and interaction integrals.

use crate::error::{Error, Result};
use crate::pde::grid::{Grid, GridField};
use crate::pde::operator::{apply_shifted, ShiftedOperator};
use crate::profile::NonlinearitySpec;
use std::sync::Arc;

/// Step of the central difference used for Hessian products.
pub const HESSIAN_STEP: f64 = 1e-5;

/// `J` on one grid, with `K + lambda M` factored once.
#[derive(Debug)]
pub struct Functional {
    grid: Arc<Grid>,
    lambda: f64,
    nl: NonlinearitySpec,
    op: ShiftedOperator,
}

/// `J = kinetic - potential`, with `kinetic = a(u, u) / 2` and `potential = integral F(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
}

impl Functional {
    pub fn new(grid: Arc<Grid>, lambda: f64, nl: NonlinearitySpec) -> Result<Self> {
        let op = match ShiftedOperator::helmholtz(grid.clone(), lambda) {
            Ok(op) => op,
            Err(Error::IndefiniteOperator { pivot, value }) => {
                return Err(Error::Hypothesis(format!(
                    "a-form is indefinite on this grid (pivot {pivot} = {value:.3e})"
                )))
            }
            Err(e) => return Err(e),
        };
        Ok(Functional { grid, lambda, nl, op })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nonlinearity(&self) -> &NonlinearitySpec {
        &self.nl
    }

    fn check(&self, u: &GridField) {
        assert!(u.grid().same_shape(&self.grid), "field does not live on the functional's grid");
    }

    /// `a(u, v) = u^T (K + lambda M) v`.
    pub fn a_dot(&self, u: &GridField, v: &GridField) -> f64 {
        let mut y = vec![0.0; self.grid.len()];
        apply_shifted(&self.grid, self.lambda, None, v.values(), &mut y);
        u.values().iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    pub fn a_norm(&self, u: &GridField) -> f64 {
        self.a_dot(u, u).max(0.0).sqrt()
    }

    pub fn energy_split(&self, u: &GridField) -> EnergySplit {
        self.check(u);
        let kinetic = 0.5 * self.a_dot(u, u);
        let potential: f64 = u.values().iter().zip(self.grid.mass()).map(|(v, m)| m * self.nl.big_f(*v)).sum();
        EnergySplit { value: kinetic - potential, kinetic, potential }
    }

    pub fn energy(&self, u: &GridField) -> f64 {
        self.energy_split(u).value
    }

    /// `S g = (K + lambda M)^{-1} M g`.
    fn solve_mass(&self, g: &[f64]) -> Vec<f64> {
        let b: Vec<f64> = g.iter().zip(self.grid.mass()).map(|(v, m)| v * m).collect();
        self.op.solve_raw(&b)
    }

    /// a-gradient `u - S f(u)`, i.e. the solution of `a(g, .) = DJ(u)[.]`.
    pub fn gradient(&self, u: &GridField) -> GridField {
        self.check(u);
        let fu: Vec<f64> = u.values().iter().map(|v| self.nl.f(*v)).collect();
        let s = self.solve_mass(&fu);
        let g: Vec<f64> = u.values().iter().zip(&s).map(|(a, b)| a - b).collect();
        GridField::new(self.grid.clone(), g).expect("finite gradient")
    }

    /// Hessian product in the a-inner product, `v - S f'(u) v`, with `f'(u) v`
    /// taken as a central difference of `f` along `v`.
    pub fn hessian_apply(&self, u: &GridField, v: &GridField) -> GridField {
        let scale = v.max_abs();
        if scale == 0.0 {
            return GridField::zeros(self.grid.clone());
        }
        let eps = HESSIAN_STEP / scale;
        let d: Vec<f64> = u
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| (self.nl.f(a + eps * b) - self.nl.f(a - eps * b)) / (2.0 * eps))
            .collect();
        let s = self.solve_mass(&d);
        let h: Vec<f64> = v.values().iter().zip(&s).map(|(a, b)| a - b).collect();
        GridField::new(self.grid.clone(), h).expect("finite Hessian product")
    }
}

/// `integral f(u_i) u_j`, by the same nodal quadrature as the energy.
pub fn interaction_integral(ui: &GridField, uj: &GridField, nl: &NonlinearitySpec) -> f64 {
    assert!(ui.grid().same_shape(uj.grid()), "bumps live on different grids");
    ui.values()
        .iter()
        .zip(uj.values())
        .zip(ui.grid().mass())
        .map(|((a, b), m)| m * nl.f(*a) * b)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::build_strip_grid;

    #[test]
    fn zero_field_has_zero_energy_and_gradient() {
        let g = build_strip_grid(2.0, 0.25).unwrap();
        let f = Functional::new(g.clone(), 1.0, NonlinearitySpec::cubic()).unwrap();
        let z = GridField::zeros(g);
        assert_eq!(f.energy(&z), 0.0);
        assert_eq!(f.gradient(&z).max_abs(), 0.0);
    }

    #[test]
    fn gradient_matches_energy_difference() {
        let g = build_strip_grid(2.0, 0.25).unwrap();
        let f = Functional::new(g.clone(), 1.0, NonlinearitySpec::cubic()).unwrap();
        let u = GridField::from_fn(g.clone(), |s, e| (1.0 - e * e) * (-s * s).exp() * 2.0);
        let w = GridField::from_fn(g.clone(), |s, e| (1.0 - e * e) * s.sin());
        let eps = 1e-4;
        let fd = (f.energy(&u.axpy(eps, &w)) - f.energy(&u.axpy(-eps, &w))) / (2.0 * eps);
        let an = f.a_dot(&f.gradient(&u), &w);
        assert!((fd - an).abs() <= 1e-7 * an.abs().max(1.0), "{fd} vs {an}");
    }
}
