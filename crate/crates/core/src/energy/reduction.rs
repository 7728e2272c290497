//! Finite-dimensional reduction: split off the tangent space of the ansatz,
//! solve the normal equation by the frozen-Hessian contraction, and evaluate
//! the reduced energy `G_R(u) = J(v_u)`.

use super::functional::{interaction_integral, EnergySplit, Functional};
use crate::ansatz::{Ansatz, AnsatzContext};
use crate::error::{Error, Result};
use crate::geometry::Chain;
use crate::pde::grid::GridField;
use nalgebra::{DMatrix, SymmetricEigen};

/// Target for `|P_perp grad J(v_u)|_a`.
pub const TOL_REDUCE: f64 = 1e-8;
/// Arc-length step of the tangent difference quotients.
pub const TANGENT_STEP: f64 = 1e-4;
pub const MAX_CONTRACTION_STEPS: usize = 200;
const MINRES_MAX_ITER: usize = 600;
const MINRES_RTOL: f64 = 1e-11;

/// Solution of `A x = b` for an operator symmetric in the a-inner product.
pub struct MinresOutcome {
    pub x: GridField,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Lanczos coefficients: diagonal and off-diagonal of the tridiagonal matrix
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// MINRES in the a-inner product, started from zero.
pub fn minres(
    fun: &Functional,
    apply: impl Fn(&GridField) -> GridField,
    b: &GridField,
    rtol: f64,
    max_iter: usize,
) -> MinresOutcome {
    let grid = fun.grid().clone();
    let zeros = || GridField::zeros(grid.clone());
    let beta1 = fun.a_norm(b);
    let mut x = zeros();
    if beta1 == 0.0 {
        return MinresOutcome { x, iterations: 0, relative_residual: 0.0, alphas: vec![], betas: vec![] };
    }
    let (mut r1, mut r2, mut y) = (b.clone(), b.clone(), b.clone());
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let (mut w, mut w2) = (zeros(), zeros());
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let v = y.scaled(1.0 / beta);
        y = apply(&v);
        if iterations >= 2 {
            y = y.axpy(-beta / oldb, &r1);
        }
        let alfa = fun.a_dot(&v, &y);
        y = y.axpy(-alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y.clone());
        oldb = beta;
        beta = fun.a_norm(&r2);
        alphas.push(alfa);
        betas.push(beta);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w.clone());
        w = v.axpy(-oldeps, &w1).axpy(-delta, &w2).scaled(1.0 / gamma);
        x = x.axpy(phi, &w);
        if phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    MinresOutcome { x, iterations, relative_residual: phibar / beta1, alphas, betas }
}

/// Eigenvalues of the Lanczos tridiagonal matrix, ascending.
pub fn ritz_values(alphas: &[f64], betas: &[f64]) -> Vec<f64> {
    let k = alphas.len();
    if k == 0 {
        return vec![];
    }
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// a-orthonormal basis of the tangent space `span{d phi / d t_i}`.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    pub vectors: Vec<GridField>,
    /// largest deviation of the Gram matrix from the identity
    pub orthonormality_error: f64,
}

impl TangentBasis {
    /// `v - sum a(v, tau_k) tau_k`.
    pub fn project_normal(&self, fun: &Functional, v: &GridField) -> GridField {
        let mut out = v.clone();
        for tau in &self.vectors {
            let c = fun.a_dot(&out, tau);
            out = out.axpy(-c, tau);
        }
        out
    }
}

/// Difference quotients of each projected bump in its anchor position,
/// orthonormalized in the a-inner product (Gram-Schmidt, twice).
pub fn tangent_basis(ctx: &AnsatzContext, fun: &Functional, ansatz: &Ansatz) -> Result<TangentBasis> {
    let grid = ctx.grid();
    let mut raw = Vec::with_capacity(ansatz.bumps.len());
    for b in &ansatz.bumps {
        let window = &b.placed.window;
        let (s0, sign) = (b.placed.s0, b.placed.sign);
        let plus = ctx.project_in_window(window, s0 + TANGENT_STEP, sign)?;
        let minus = ctx.project_in_window(window, s0 - TANGENT_STEP, sign)?;
        let d = plus.axpy(-1.0, &minus).scaled(0.5 / TANGENT_STEP);
        raw.push(d.embed_into(grid)?);
    }
    let mut vectors: Vec<GridField> = Vec::with_capacity(raw.len());
    for mut v in raw {
        for _ in 0..2 {
            for q in &vectors {
                let c = fun.a_dot(&v, q);
                v = v.axpy(-c, q);
            }
        }
        let n = fun.a_norm(&v);
        if !(n > 1e-10) {
            return Err(Error::ContractionFailure("tangent vectors are linearly dependent".into()));
        }
        vectors.push(v.scaled(1.0 / n));
    }
    let mut err: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((fun.a_dot(a, b) - target).abs());
        }
    }
    Ok(TangentBasis { vectors, orthonormality_error: err })
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    /// `u = phi_R(X)`
    pub base: GridField,
    pub tangents: TangentBasis,
    /// `v_u = u + w`
    pub refined: GridField,
    pub w_norm: f64,
    /// `|P_perp grad J(u + w_k)|_a` per iteration, starting at `w_0 = 0`
    pub history: Vec<f64>,
    /// `|grad J(u)|_a`
    pub grad_norm: f64,
    pub j_base: f64,
    /// `G_R(u) = J(v_u)`
    pub g_r: f64,
    /// largest ratio of successive normal-gradient norms
    pub contraction_factor: f64,
    pub iterations: usize,
    /// Ritz value of smallest magnitude of the normal-space Hessian
    pub min_normal_eigenvalue: f64,
    pub trust_radius: f64,
}

impl ReductionResult {
    pub fn final_normal_gradient(&self) -> f64 {
        *self.history.last().expect("history starts with the base gradient")
    }

    /// `|J(u) - G_R(u)|`.
    pub fn gap(&self) -> f64 {
        (self.j_base - self.g_r).abs()
    }

    /// `|v_u - u|_a / |u|_a`.
    pub fn relative_correction(&self, fun: &Functional) -> f64 {
        self.w_norm / fun.a_norm(&self.base)
    }
}

/// Trust radius `r0 = 0.5 |U|_a`, the smaller of the two profiles.
pub fn trust_radius(ctx: &AnsatzContext) -> f64 {
    0.5 * ctx.profile(1).a_norm().min(ctx.profile(-1).a_norm())
}

/// Runs the contraction `w <- w - L_u^{-1} P_perp grad J(u + w)` from `w = 0`,
/// with `L_u = P_perp J''(u) P_perp` frozen at `u = phi_R(X)`.
pub fn normal_refine(ctx: &AnsatzContext, fun: &Functional, chain: &Chain, tol: f64) -> Result<ReductionResult> {
    let ansatz = ctx.phi(chain)?;
    refine_from(ctx, fun, &ansatz, ansatz.field.clone(), tol)
}

/// As [`normal_refine`], but iterating from a given field `u` with the
/// tangent space of `ansatz`.
pub fn refine_from(ctx: &AnsatzContext, fun: &Functional, ansatz: &Ansatz, u: GridField, tol: f64) -> Result<ReductionResult> {
    let tangents = tangent_basis(ctx, fun, ansatz)?;
    let radius = trust_radius(ctx);
    let grad_u = fun.gradient(&u);
    let grad_norm = fun.a_norm(&grad_u);
    let j_base = fun.energy(&u);

    let normal_op = |v: &GridField| {
        let pv = tangents.project_normal(fun, v);
        tangents.project_normal(fun, &fun.hessian_apply(&u, &pv))
    };
    let mut w = GridField::zeros(fun.grid().clone());
    let mut g = tangents.project_normal(fun, &grad_u);
    let mut history = vec![fun.a_norm(&g)];
    let mut factor: f64 = 0.0;
    let mut min_eig = f64::NAN;
    let mut iterations = 0;
    while *history.last().unwrap() > tol {
        if iterations == MAX_CONTRACTION_STEPS {
            return Err(Error::ContractionFailure(format!(
                "no convergence in {MAX_CONTRACTION_STEPS} steps (last |P grad J| = {:.3e})",
                history.last().unwrap()
            )));
        }
        let out = minres(fun, normal_op, &g, MINRES_RTOL, MINRES_MAX_ITER);
        if !(out.relative_residual <= 1e-6) {
            return Err(Error::ContractionFailure(format!(
                "normal-space Hessian solve stalled at relative residual {:.3e}",
                out.relative_residual
            )));
        }
        if iterations == 0 {
            min_eig = ritz_values(&out.alphas, &out.betas).iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        }
        w = tangents.project_normal(fun, &w.axpy(-1.0, &out.x));
        iterations += 1;
        let w_norm = fun.a_norm(&w);
        if w_norm > radius {
            return Err(Error::LeftTrustRegion { norm: w_norm, radius });
        }
        g = tangents.project_normal(fun, &fun.gradient(&u.axpy(1.0, &w)));
        let gn = fun.a_norm(&g);
        let ratio = gn / history.last().unwrap();
        history.push(gn);
        if gn > tol {
            factor = factor.max(ratio);
            if ratio >= 1.0 {
                return Err(Error::ContractionFailure(format!(
                    "normal gradient grew from {:.3e} to {gn:.3e}",
                    history[history.len() - 2]
                )));
            }
        }
    }
    let refined = u.axpy(1.0, &w);
    let g_r = fun.energy(&refined);
    Ok(ReductionResult {
        w_norm: fun.a_norm(&w),
        base: u,
        tangents,
        refined,
        history,
        grad_norm,
        j_base,
        g_r,
        contraction_factor: factor,
        iterations,
        min_normal_eigenvalue: min_eig,
        trust_radius: radius,
    })
}

#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub r: f64,
    pub n: usize,
    pub j_phi: EnergySplit,
    /// `k (J(U+) + J(U-)) + (n - 2k) J(U+)`
    pub e_n: f64,
    /// `I_ij = integral f(U_i) U_j` for the placed bumps, zero on the diagonal
    pub interactions: Vec<Vec<f64>>,
    /// `J(phi) - (E_n - 1/2 sum_{i != j} I_ij)`
    pub remainder: f64,
    pub g_r: f64,
    pub gap: f64,
    pub grad_norm: f64,
}

impl EnergyReport {
    pub fn interaction_sum(&self) -> f64 {
        self.interactions.iter().flatten().sum()
    }

    pub fn max_abs_interaction(&self) -> f64 {
        self.interactions.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `E_n` for `n` alternating bumps.
pub fn reference_energy(ctx: &AnsatzContext, n: usize) -> f64 {
    let k = n / 2;
    let (ep, em) = (ctx.profile(1).energy(), ctx.profile(-1).energy());
    k as f64 * (ep + em) + (n - 2 * k) as f64 * ep
}

/// Pairwise interaction integrals of the placed bumps of a chain.
pub fn chain_interactions(ctx: &AnsatzContext, chain: &Chain) -> Result<Vec<Vec<f64>>> {
    let grid = ctx.grid();
    let placed: Vec<GridField> = chain
        .arc_positions()
        .iter()
        .zip(chain.signs())
        .map(|(&s0, &sign)| ctx.place_at(s0, sign)?.on_parent(grid))
        .collect::<Result<_>>()?;
    let n = placed.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = interaction_integral(&placed[i], &placed[j], ctx.nonlinearity());
            }
        }
    }
    Ok(out)
}

/// Energy report of `phi_R(X)` without the reduction.
pub fn energy_report(ctx: &AnsatzContext, fun: &Functional, chain: &Chain, phi: &GridField) -> Result<EnergyReport> {
    let j_phi = fun.energy_split(phi);
    let e_n = reference_energy(ctx, chain.len());
    let interactions = chain_interactions(ctx, chain)?;
    let sum: f64 = interactions.iter().flatten().sum();
    Ok(EnergyReport {
        r: ctx.r(),
        n: chain.len(),
        remainder: j_phi.value - (e_n - 0.5 * sum),
        j_phi,
        e_n,
        interactions,
        g_r: f64::NAN,
        gap: f64::NAN,
        grad_norm: fun.a_norm(&fun.gradient(phi)),
    })
}

/// `G_R` at a chain together with its energy report.
pub fn reduced_energy(ctx: &AnsatzContext, fun: &Functional, chain: &Chain) -> Result<(ReductionResult, EnergyReport)> {
    if chain.is_empty() {
        let zero = GridField::zeros(ctx.grid().clone());
        let res = ReductionResult {
            base: zero.clone(),
            tangents: TangentBasis { vectors: vec![], orthonormality_error: 0.0 },
            refined: zero,
            w_norm: 0.0,
            history: vec![0.0],
            grad_norm: 0.0,
            j_base: 0.0,
            g_r: 0.0,
            contraction_factor: 0.0,
            iterations: 0,
            min_normal_eigenvalue: f64::NAN,
            trust_radius: trust_radius(ctx),
        };
        let rep = EnergyReport {
            r: ctx.r(),
            n: 0,
            j_phi: EnergySplit { value: 0.0, kinetic: 0.0, potential: 0.0 },
            e_n: 0.0,
            interactions: vec![],
            remainder: 0.0,
            g_r: 0.0,
            gap: 0.0,
            grad_norm: 0.0,
        };
        return Ok((res, rep));
    }
    let res = normal_refine(ctx, fun, chain, TOL_REDUCE)?;
    let mut rep = energy_report(ctx, fun, chain, &res.base)?;
    rep.g_r = res.g_r;
    rep.gap = res.gap();
    rep.grad_norm = res.grad_norm;
    Ok((res, rep))
}
