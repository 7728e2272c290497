//! Chain minimization: Nelder-Mead on `J(phi_R(X))` with a separation
//! penalty, then one full reduction at the minimizer.

use super::functional::Functional;
use super::reduction::{reduced_energy, EnergyReport, ReductionResult};
use crate::ansatz::AnsatzContext;
use crate::error::{Error, Result};
use crate::geometry::{chain_admissible, chain_from_params, AdmissibilityReport, Chain, SeparationScales};

/// Objective assigned to parameter vectors that do not form a chain.
const INFEASIBLE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// weight of `max(0, g1 - separation)^2`
    pub penalty: f64,
    /// stop when every vertex is within this max-norm distance of the best
    pub diameter_tol: f64,
    pub max_evaluations: usize,
    /// edge length of the initial simplex, in t
    pub initial_step: f64,
    /// slack in `U_{1,R}` below which the minimizer counts as stuck
    pub boundary_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { penalty: 1e3, diameter_tol: 1e-5, max_evaluations: 4000, initial_step: 0.01, boundary_tol: 1e-4 }
    }
}

/// Best vertex after one Nelder-Mead iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub t: Vec<f64>,
    pub j_phi: f64,
    pub min_sep: f64,
    /// smallest distance to an end of the curve (infinite on closed curves)
    pub boundary_dist: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub chain: Chain,
    pub trace: Vec<TraceRow>,
    /// penalized objective at the minimizer
    pub objective: f64,
    pub evaluations: usize,
    pub admissibility: AdmissibilityReport,
    pub reduction: ReductionResult,
    pub report: EnergyReport,
}

struct Scored {
    value: f64,
    j_phi: f64,
    min_sep: f64,
    boundary: f64,
}

fn normalize(ctx: &AnsatzContext, t: &[f64]) -> Vec<f64> {
    if ctx.curve().closed() {
        t.iter().map(|v| v.rem_euclid(1.0)).collect()
    } else {
        t.to_vec()
    }
}

fn score(ctx: &AnsatzContext, fun: &Functional, scales: &SeparationScales, open: bool, penalty: f64, t: &[f64]) -> Scored {
    let bad = Scored { value: INFEASIBLE, j_phi: f64::NAN, min_sep: f64::NAN, boundary: f64::NAN };
    let Ok(chain) = chain_from_params(ctx.curve(), ctx.r(), &normalize(ctx, t)) else {
        return bad;
    };
    let Ok(ansatz) = ctx.phi(&chain) else {
        return bad;
    };
    let adm = chain_admissible(&chain, scales, 1, open);
    let j_phi = fun.energy(&ansatz.field);
    let violation = (-adm.slack).max(0.0);
    Scored { value: j_phi + penalty * violation * violation, j_phi, min_sep: adm.min_separation, boundary: 0.5 * adm.min_boundary }
}

/// Minimizes the penalized surrogate over the chain parameters, then scores
/// the result with the full reduced energy.
pub fn minimize_chain(
    ctx: &AnsatzContext,
    fun: &Functional,
    initial: &Chain,
    scales: &SeparationScales,
    open: bool,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult> {
    let start = chain_admissible(initial, scales, 1, open);
    if !start.admissible {
        return Err(Error::RangeViolation(format!("initial chain is not admissible (slack {:.3e})", start.slack)));
    }
    let n = initial.len();
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |t: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        score(ctx, fun, scales, open, opts.penalty, t)
    };

    let x0 = initial.params().to_vec();
    let mut simplex: Vec<(Vec<f64>, Scored)> = Vec::with_capacity(n + 1);
    let s0 = eval(&x0);
    simplex.push((x0.clone(), s0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += opts.initial_step;
        let s = eval(&x);
        simplex.push((x, s));
    }

    let mut trace = Vec::new();
    let mut iter = 0;
    loop {
        simplex.sort_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap_or(std::cmp::Ordering::Equal));
        let best = &simplex[0];
        trace.push(TraceRow {
            iter,
            t: normalize(ctx, &best.0),
            j_phi: best.1.j_phi,
            min_sep: best.1.min_sep,
            boundary_dist: best.1.boundary,
        });
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&best.0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0f64, f64::max);
        if diameter <= opts.diameter_tol || evaluations.get() >= opts.max_evaluations || n == 0 {
            break;
        }
        iter += 1;

        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].0.clone();
        let along = |c: f64| -> Vec<f64> { centroid.iter().zip(&worst).map(|(m, w)| m + c * (m - w)).collect() };

        let xr = along(1.0);
        let sr = eval(&xr);
        if sr.value < simplex[0].1.value {
            let xe = along(2.0);
            let se = eval(&xe);
            simplex[n] = if se.value < sr.value { (xe, se) } else { (xr, sr) };
        } else if sr.value < simplex[n - 1].1.value {
            simplex[n] = (xr, sr);
        } else {
            let outside = sr.value < simplex[n].1.value;
            let xc = along(if outside { 0.5 } else { -0.5 });
            let sc = eval(&xc);
            let limit = if outside { sr.value } else { simplex[n].1.value };
            if sc.value < limit {
                simplex[n] = (xc, sc);
            } else {
                let xb = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = xb.iter().zip(&v.0).map(|(b, y)| b + 0.5 * (y - b)).collect();
                    let s = eval(&x);
                    *v = (x, s);
                }
            }
        }
    }

    let (best_t, best) = (normalize(ctx, &simplex[0].0), &simplex[0].1);
    let chain = chain_from_params(ctx.curve(), ctx.r(), &best_t)?;
    let admissibility = chain_admissible(&chain, scales, 1, open);
    if admissibility.slack < opts.boundary_tol {
        return Err(Error::StuckOnBoundary { slack: admissibility.slack });
    }
    let (reduction, report) = reduced_energy(ctx, fun, &chain)?;
    Ok(MinimizeResult { chain, trace, objective: best.value, evaluations: evaluations.get(), admissibility, reduction, report })
}
