//! The verification suite: one record per acceptance check.

use super::config::RunConfig;
use super::run::{check_anchor_signs, limit_profiles, minimize_on, projection_report, Profiles, Setup};
use crate::energy::reduction::{chain_interactions, normal_refine};
use crate::energy::MinimizeResult;
use crate::error::{Error, Result};
use crate::geometry::montecarlo::DEFAULT_SAMPLES;
use crate::geometry::curve::dist;
use crate::geometry::{ball_difference_volume, chain_admissible, fermat_point, CurveSource, Point};
use crate::io::write_atomic;
use crate::pde::eigen::smallest_eigenpairs;
use crate::pde::grid::build_strip_grid;
use crate::profile::decay::linear_fit;
use crate::profile::ground_state::default_strip_half_length;
use crate::profile::truncation::{h1_norm, truncated_projection};
use crate::profile::{check_nondegeneracy, decay_rate, decay_rate_exact, solve_ground_state, LAMBDA_11};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

/// Report ids, in acceptance order.
pub const CHECK_IDS: [&str; 11] = [
    "strip-spectrum",
    "decay-rate",
    "nondegeneracy",
    "geometric-oracles",
    "splitting",
    "truncation-rate",
    "projection-convergence",
    "interaction-scaling",
    "alternating-sign",
    "reduction",
    "theorem-shape",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub id: &'static str,
    pub passed: bool,
    pub measured: String,
    pub target: String,
    pub tolerance: String,
    pub runtime_s: f64,
    /// supporting numbers, or the error that stopped the check
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["id", "status", "measured", "target", "tolerance", "runtime_s", "detail"]);
        for r in &self.records {
            let _ = w.write_record([
                r.id,
                if r.passed { "pass" } else { "fail" },
                &r.measured,
                &r.target,
                &r.tolerance,
                &format!("{:.1}", r.runtime_s),
                &r.detail,
            ]);
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (k, r) in self.records.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>2}. {:<24} {}  measured {}  target {} ({})  [{:.1}s]",
                k + 1,
                r.id,
                if r.passed { "PASS" } else { "FAIL" },
                r.measured,
                r.target,
                r.tolerance,
                r.runtime_s
            );
            if !r.detail.is_empty() {
                let _ = writeln!(s, "    {}", r.detail);
            }
        }
        let failed = self.records.iter().filter(|r| !r.passed).count();
        let _ = writeln!(s, "{} of {} checks passed", self.records.len() - failed, self.records.len());
        s
    }
}

/// Outcome of one check before timing is attached.
struct Outcome {
    passed: bool,
    measured: String,
    target: String,
    tolerance: String,
    detail: String,
}

fn outcome(passed: bool, measured: String, target: &str, tolerance: &str, detail: String) -> Outcome {
    Outcome { passed, measured, target: target.into(), tolerance: tolerance.into(), detail }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    linear_fit(xs, ys).0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Shared inputs: both profiles and lazily built setups per curve and `R`.
pub struct Session {
    pub cfg: RunConfig,
    profiles: Result<Profiles>,
    setups: Mutex<HashMap<(&'static str, u64), Arc<OnceLock<Result<Arc<Setup>>>>>>,
}

impl Session {
    pub fn new(cfg: &RunConfig) -> Self {
        Session { cfg: cfg.clone(), profiles: limit_profiles(cfg), setups: Mutex::new(HashMap::new()) }
    }

    /// The shared profiles; checks that need them fail if the solve failed.
    pub fn profiles(&self) -> Result<&Profiles> {
        self.profiles.as_ref().map_err(Clone::clone)
    }

    fn curve_config(&self, curve: &'static str) -> RunConfig {
        let mut c = self.cfg.clone();
        c.curve = match curve {
            "circle" => CurveSource::circle([0.0, 0.0], 1.0),
            _ => CurveSource::segment([0.0, 0.0], [1.0, 0.0]),
        };
        c
    }

    /// Unit circle (`"circle"`) or unit segment (`"segment"`) at `R`.
    pub fn setup(&self, curve: &'static str, r: f64) -> Result<Arc<Setup>> {
        let cell = self.setups.lock().expect("setup map").entry((curve, r.to_bits())).or_default().clone();
        cell.get_or_init(|| Setup::new(&self.curve_config(curve), self.profiles()?, r).map(Arc::new)).clone()
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn mu(&self) -> f64 {
        decay_rate_exact(self.cfg.lambda)
    }
}

fn strip_spectrum(s: &Session) -> Result<Outcome> {
    let h = s.cfg.h;
    let half = 10.0;
    let target = LAMBDA_11;
    let mut rows = Vec::new();
    for hh in [2.0 * h, h, 0.4 * h] {
        let g = build_strip_grid(half, hh)?;
        let raw = smallest_eigenpairs(&g, None, 1)?[0].value;
        let longitudinal = 4.0 / (hh * hh) * (PI * hh / (4.0 * half)).sin().powi(2);
        rows.push((hh, raw, raw - longitudinal));
    }
    let fine = rows[2].2;
    let err = rel(fine, target);
    let monotone = rows.windows(2).all(|w| w[1].2 > w[0].2) || rows.windows(2).all(|w| w[1].2 < w[0].2);
    let mut detail = String::new();
    for (hh, raw, t) in &rows {
        let _ = write!(detail, "h={hh:.3}: theta1={raw:.6} transverse={t:.6}; ");
    }
    let _ = write!(detail, "monotone={monotone}");
    Ok(outcome(
        err <= 5.5e-3 && monotone,
        format!("{fine:.6} (rel {:.3}%) at h={:.3}", 100.0 * err, rows[2].0),
        &format!("{target:.6}"),
        "0.55%, monotone in h",
        detail,
    ))
}

fn decay(s: &Session) -> Result<Outcome> {
    let fit = s.profiles()?.fit_plus;
    let mut coarse_cfg = s.cfg.clone();
    coarse_cfg.h = 2.0 * s.cfg.h;
    let mu = s.mu();
    let grid = build_strip_grid(coarse_cfg.l_xi.unwrap_or_else(|| default_strip_half_length(mu, coarse_cfg.h)), coarse_cfg.h)?;
    let coarse = solve_ground_state(&s.cfg.nonlinearity, s.cfg.lambda, 1, &grid)?;
    let cfit = decay_rate(&coarse, s.cfg.fit_window)?;
    let improves = fit.relative_error < cfit.relative_error;
    Ok(outcome(
        fit.relative_error <= 0.03 && improves,
        format!("{:.6} (rel {:.3}%)", fit.mu_fit, 100.0 * fit.relative_error),
        &format!("{mu:.6}"),
        "3%, improving as h halves",
        format!(
            "h={}: rel {:.3e}; h={}: rel {:.3e}; window [{}, {}]",
            coarse_cfg.h, cfit.relative_error, s.cfg.h, fit.relative_error, s.cfg.fit_window.0, s.cfg.fit_window.1
        ),
    ))
}

fn nondegeneracy(s: &Session) -> Result<Outcome> {
    let rep = check_nondegeneracy(&s.profiles()?.plus, Some(1e-2))?;
    let ok = rep.kernel_count == 1 && rep.cosine >= 0.999 && rep.next_abs >= 0.1;
    Ok(outcome(
        ok,
        format!("{} in (-0.01, 0.01), cosine {:.7}, next |theta| {:.4}", rep.kernel_count, rep.cosine, rep.next_abs),
        "1 kernel eigenvalue, cosine >= 0.999, next >= 0.1",
        "exact count",
        format!("eigenvalues {:?}", rep.eigenvalues.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>()),
    ))
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
}

fn geometric(s: &Session) -> Result<Outcome> {
    let mut rng = s.rng(4);
    // wide angle at the first vertex: the vertex itself is the Fermat point
    let mut worst_a = 0.0f64;
    for _ in 0..1000 {
        let a = random_point(&mut rng);
        let (v, w) = (rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0));
        let theta = rng.gen_range(2.0 * PI / 3.0..PI - 1e-3);
        let phi0 = rng.gen_range(0.0..2.0 * PI);
        let b = [a[0] + v * phi0.cos(), a[1] + v * phi0.sin()];
        let c = [a[0] + w * (phi0 + theta).cos(), a[1] + w * (phi0 + theta).sin()];
        let fp = fermat_point(a, b, c);
        worst_a = worst_a.max((fp.total - (v + w)).abs());
    }
    let mut worst_b = f64::INFINITY;
    for _ in 0..1000 {
        let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let semi = 0.5 * (dist(a, b) + dist(b, c) + dist(a, c));
        worst_b = worst_b.min(fermat_point(a, b, c).total - semi);
    }
    // ball differences: C from the closed form on a grid reaching the corner
    // d -> 1, r -> 2, then 500 Monte-Carlo configurations checked against it
    let mut c = 0.0f64;
    for dim in [2, 3] {
        for i in 1..=100 {
            let d = 0.999 * i as f64 / 100.0;
            for j in 0..=100 {
                let r = 1.0 + d * j as f64 / 100.0;
                let exact = crate::geometry::ball_difference_exact(dim, d, r).expect("dims 2 and 3");
                c = c.max(exact / (d + r - 1.0));
            }
        }
    }
    let configs: Vec<(usize, f64, f64, u64)> = (0..500)
        .map(|k| {
            let d = rng.gen_range(0.02..0.98);
            let r = 1.0 + rng.gen::<f64>() * d;
            (2 + k % 2, d, r, rng.gen())
        })
        .collect();
    let estimates: Vec<(f64, f64, crate::geometry::VolumeEstimate)> = configs
        .par_iter()
        .map(|&(dim, d, r, seed)| {
            let x1 = vec![0.0; dim];
            let mut x2 = vec![0.0; dim];
            x2[0] = d;
            let exact = crate::geometry::ball_difference_exact(dim, d, r).expect("dims 2 and 3");
            ball_difference_volume(&x1, &x2, r, DEFAULT_SAMPLES / 10, seed).map(|e| (d + r - 1.0, exact, e))
        })
        .collect::<Result<_>>()?;
    let violations = estimates.iter().filter(|(rhs, _, e)| e.lower() > c * rhs).count();
    let covered = estimates.iter().filter(|(_, x, e)| e.lower() <= *x && *x <= e.upper()).count();
    let ok = worst_a <= 1e-7 && worst_b >= -1e-9 && violations == 0;
    Ok(outcome(
        ok,
        format!("wide-angle {worst_a:.2e}, semiperimeter margin {worst_b:.3e}, ball violations {violations}"),
        "|s-(v+w)| <= 1e-7; s >= semiperimeter - 1e-9; 0 violations",
        "1000 + 1000 triangles, 500 ball configs",
        format!("calibrated C = {c:.4}; closed form inside the 99% interval for {covered} of 500"),
    ))
}

fn splitting(s: &Session) -> Result<Outcome> {
    let nl = s.cfg.nonlinearity;
    let mut rng = s.rng(5);
    let tuple = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let n = rng.gen_range(2..=4);
        (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    };
    let ratio = |t: [f64; 4]| (t[0] / t[1].max(1e-300), t[2] / t[3].max(1e-300));
    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (a, b) = ratio(nl.splitting_terms(&tuple(&mut rng)));
        c1 = c1.max(a);
        c2 = c2.max(b);
    }
    // fitted constants carry a 10% margin over the calibration maximum
    let (c1, c2) = (1.1 * c1, 1.1 * c2);
    let mut violations = 0;
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let t = nl.splitting_terms(&tuple(&mut rng));
        let (a, b) = ratio(t);
        m1 = m1.max(a);
        m2 = m2.max(b);
        if t[0] > c1 * t[1] || t[2] > c2 * t[3] {
            violations += 1;
        }
    }
    Ok(outcome(
        violations == 0,
        format!("{violations} violations"),
        "0 violations",
        "10^5 tuples, |u_i| <= 1",
        format!("alpha {}, fitted C1 {c1:.4}, C2 {c2:.4}; largest test ratios {m1:.4}, {m2:.4}", nl.alpha()),
    ))
}

fn truncation(s: &Session) -> Result<Outcome> {
    let u = &s.profiles()?.plus;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (3..=8)
        .map(|a| {
            let a = a as f64;
            let t = truncated_projection(u, a, a)?;
            Ok((a, h1_norm(&u.field().axpy(-1.0, &t)).ln()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let sl = slope(&xs, &ys);
    let mu = s.mu();
    Ok(outcome(
        rel(-sl, mu) <= 0.05,
        format!("{sl:.5}"),
        &format!("{:.6}", -mu),
        "5%",
        format!("log distances {:?}", ys.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()),
    ))
}

const RS: [f64; 3] = [20.0, 40.0, 80.0];

fn projection(s: &Session) -> Result<Outcome> {
    let reps = RS
        .iter()
        .map(|&r| Ok(projection_report(&*s.setup("circle", r)?, 0.0)?.1))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = RS.iter().map(|r| r.ln()).collect();
    let amb: Vec<f64> = reps.iter().map(|p| p.ambient).collect();
    let sl = slope(&xs, &amb.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let tube_sl = slope(&xs, &reps.iter().map(|p| p.tube.ln()).collect::<Vec<_>>());
    let decreasing = amb.windows(2).all(|w| w[1] < w[0]);
    Ok(outcome(
        decreasing && (-0.8..=-0.3).contains(&sl),
        format!("slope {sl:.3}"),
        "strictly decreasing, slope in [-0.8, -0.3]",
        "range",
        format!(
            "ambient H1 {:?}; outside-tube part {:?}; tube-coordinate distance slope {tube_sl:.3}",
            amb.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            reps.iter().map(|p| format!("{:.4}", p.ambient_outside)).collect::<Vec<_>>()
        ),
    ))
}

const SEPARATIONS: [f64; 7] = [4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];

/// Two bumps on the segment tube at `R = 40`, centred, `d` apart.
fn pair_params(r: f64, d: f64) -> [f64; 2] {
    [0.5 - d / (2.0 * r), 0.5 + d / (2.0 * r)]
}

fn interaction(s: &Session) -> Result<Outcome> {
    let r = 40.0;
    let setup = s.setup("segment", r)?;
    let ys = SEPARATIONS
        .iter()
        .map(|&d| {
            let chain = setup.chain(&pair_params(r, d))?;
            Ok(chain_interactions(&setup.ctx, &chain)?[0][1].abs().ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let sl = slope(&SEPARATIONS, &ys);
    let mu = s.mu();
    Ok(outcome(
        rel(-sl, mu) <= 0.05,
        format!("{sl:.5} (rel {:.3}%)", 100.0 * rel(-sl, mu)),
        &format!("{:.6}", -mu),
        "5%",
        format!("segment tube R = {r}, d in [4, 10]"),
    ))
}

/// Random chain on the circle with one adjacent pair exactly `g1` apart.
fn boundary_chain(rng: &mut ChaCha8Rng, n: usize, r: f64, g1: f64) -> Vec<f64> {
    let dt = (g1 / (2.0 * r)).asin() / PI;
    loop {
        let t1 = rng.gen::<f64>();
        let mut t = vec![t1, t1 + dt];
        let mut rest: Vec<f64> = (2..n).map(|_| rng.gen_range(t1 + 2.0 * dt..t1 + 1.0 - dt)).collect();
        rest.sort_by(f64::total_cmp);
        t.extend(rest);
        let ok = t.windows(2).all(|w| w[1] - w[0] >= dt) && t1 + 1.0 - t[n - 1] >= dt;
        if ok {
            let mut p: Vec<f64> = t.iter().map(|v| v.rem_euclid(1.0)).collect();
            p.sort_by(f64::total_cmp);
            return p;
        }
    }
}

fn alternating(s: &Session) -> Result<Outcome> {
    let r = 40.0;
    let setup = s.setup("segment", r)?;
    let ctx = &setup.ctx;
    let grid = ctx.grid();
    let fun = &setup.fun;
    let mut cross = Vec::new();
    let mut same = Vec::new();
    let mut worst_remainder = 0.0f64;
    for &d in &SEPARATIONS {
        let chain = setup.chain(&pair_params(r, d))?;
        let (s1, s2) = (chain.arc_positions()[0], chain.arc_positions()[1]);
        let v1 = ctx.project_at(s1, 1)?.v.embed_into(grid)?;
        let v2m = ctx.project_at(s2, -1)?.v.embed_into(grid)?;
        let v2p = ctx.project_at(s2, 1)?.v.embed_into(grid)?;
        let (j1, j2m, j2p) = (fun.energy(&v1), fun.energy(&v2m), fun.energy(&v2p));
        let c = fun.energy(&v1.axpy(1.0, &v2m)) - j1 - j2m;
        cross.push(c);
        same.push(fun.energy(&v1.axpy(1.0, &v2p)) - j1 - j2p);
        let i = chain_interactions(ctx, &chain)?;
        let lead = -0.5 * (i[0][1] + i[1][0]);
        if d >= 6.0 / s.mu() {
            worst_remainder = worst_remainder.max((c - lead).abs() / lead.abs());
        }
    }
    let mu = s.mu();
    let signs_ok = cross.iter().all(|c| *c > 0.0) && same.iter().all(|c| *c < 0.0);
    let sl_cross = slope(&SEPARATIONS, &cross.iter().map(|c| c.abs().ln()).collect::<Vec<_>>());
    let sl_same = slope(&SEPARATIONS, &same.iter().map(|c| c.abs().ln()).collect::<Vec<_>>());

    // boundary chains against the equispaced chain on the circle at R = 80
    let rb = 80.0;
    let circle = s.setup("circle", rb)?;
    let g1 = circle.scales.g1;
    let mut rng = s.rng(9);
    let mut ordering = Vec::new();
    for n in [2usize, 4] {
        let interior: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let j_int = circle.fun.energy(&circle.ctx.phi(&circle.chain(&interior)?)?.field);
        let chains: Vec<Vec<f64>> = (0..50).map(|_| boundary_chain(&mut rng, n, rb, g1)).collect();
        let j_min = chains
            .par_iter()
            .map(|t| Ok(circle.fun.energy(&circle.ctx.phi(&circle.chain(t)?)?.field)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        ordering.push((n, j_min, j_int));
    }
    let order_ok = ordering.iter().all(|(_, b, i)| b > i);
    let slopes_ok = rel(-sl_cross, mu) <= 0.05 && rel(-sl_same, mu) <= 0.05;
    let beta: Vec<String> =
        ordering.iter().map(|(n, b, i)| format!("n={n}: beta_hat {:.3e}", (b - i) / (-mu * g1).exp())).collect();
    Ok(outcome(
        signs_ok && slopes_ok && order_ok && worst_remainder <= 0.1,
        format!(
            "signs {}, slopes {sl_cross:.4}/{sl_same:.4}, boundary-interior gaps {}",
            if signs_ok { "ok" } else { "wrong" },
            ordering.iter().map(|(n, b, i)| format!("n={n}: {:.4e}", b - i)).collect::<Vec<_>>().join(", ")
        ),
        &format!("(+,-) > 0, (+,+) < 0, slopes {:.6}, boundary > interior", -mu),
        "5% on slopes, remainder <= 10% for d >= 6/mu, strict ordering",
        format!("worst remainder {worst_remainder:.3e}; g1 = {g1:.4}; {}", beta.join(", ")),
    ))
}

fn reduction(s: &Session) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &r in &RS {
        let setup = s.setup("circle", r)?;
        let chain = setup.chain(&[0.0, 0.5])?;
        let red = normal_refine(&setup.ctx, &setup.fun, &chain, s.cfg.tol_reduce)?;
        rows.push((r, red.contraction_factor, red.final_normal_gradient(), red.gap(), red.grad_norm, red.min_normal_eigenvalue));
    }
    let c20 = rows[0].3 / (rows[0].4 * rows[0].4);
    let ratios: Vec<f64> = rows.iter().map(|row| row.3 / (row.4 * row.4) / c20).collect();
    let ok = rows.iter().all(|row| row.1 < 1.0 && row.2 <= 1e-8) && ratios.iter().all(|q| (0.5..=2.0).contains(q));
    let worst_factor = rows.iter().map(|row| row.1).fold(0.0f64, f64::max);
    let worst_grad = rows.iter().map(|row| row.2).fold(0.0f64, f64::max);
    let eig: Vec<String> = rows.iter().map(|row| format!("{:.4}", row.5)).collect();
    Ok(outcome(
        ok,
        format!("factor {worst_factor:.3e}, |P grad J(v_u)| {worst_grad:.2e}, C ratios {ratios:.4?}"),
        "factor < 1, normal gradient <= 1e-8, gap <= C |grad J|^2",
        &format!("C = {c20:.4} fitted at R = 20, factor 2"),
        format!("min normal-space eigenvalues {eig:?}"),
    ))
}

/// Gap `t2 - t1` on the circle, in `[0, 1)`.
fn gap(t: &[f64]) -> f64 {
    (t[1] - t[0]).rem_euclid(1.0)
}

fn theorem_shape(s: &Session) -> Result<Outcome> {
    let cases: [(&'static str, usize); 4] = [("circle", 2), ("circle", 4), ("segment", 2), ("segment", 3)];
    let mut signs_ok = true;
    let mut interior_ok = true;
    let mut decreasing_ok = true;
    let mut detail = Vec::new();
    let mut circle2_r40: Option<MinimizeResult> = None;
    let mut chains = Vec::new();
    for (curve, n) in cases {
        let mut ratios = Vec::new();
        for &r in &RS {
            let setup = s.setup(curve, r)?;
            let shift = if curve == "circle" { 0.0 } else { 0.5 };
            let init: Vec<f64> = (0..n).map(|i| (i as f64 + shift) / n as f64).collect();
            let res = match minimize_on(&setup, &init, s.cfg.tol_reduce) {
                Ok(res) => res,
                Err(e @ Error::StuckOnBoundary { .. }) => {
                    interior_ok = false;
                    detail.push(format!("{curve} n={n} R={r}: {e}"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if check_anchor_signs(setup.ctx.grid(), &res.reduction.refined, &res.chain).is_err() {
                signs_ok = false;
            }
            if !(chain_admissible(&res.chain, &setup.scales, 1, setup.open()).slack > 0.0) {
                interior_ok = false;
            }
            ratios.push(res.reduction.relative_correction(&setup.fun));
            chains.push(format!("{curve} n={n} R={r}: t {:?}", res.chain.params().iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>()));
            if curve == "circle" && n == 2 && r == 40.0 {
                circle2_r40 = Some(res);
            }
        }
        if ratios.len() < RS.len() || !ratios.windows(2).all(|w| w[1] < w[0]) {
            decreasing_ok = false;
        }
        detail.push(format!("{curve} n={n}: |v_u - phi|/|phi| {:?}", ratios.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()));
    }

    // grid-search oracle over t2 - t1 with t1 = 0, resolution 1e-3
    let setup = s.setup("circle", 40.0)?;
    let min_dt = (setup.scales.g1 / 80.0).asin() / PI;
    let grid_pts: Vec<f64> = (1..1000).map(|k| k as f64 * 1e-3).filter(|dt| *dt > min_dt && 1.0 - dt > min_dt).collect();
    let energies = grid_pts
        .par_iter()
        .map(|&dt| Ok(setup.fun.energy(&setup.ctx.phi(&setup.chain(&[0.0, dt])?)?.field)))
        .collect::<Result<Vec<f64>>>()?;
    let (k_best, _) = energies.iter().enumerate().fold((0, f64::INFINITY), |b, (k, e)| if *e < b.1 { (k, *e) } else { b });
    let oracle = grid_pts[k_best];
    let spread = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - energies[k_best];
    let plateau: Vec<f64> =
        grid_pts.iter().zip(&energies).filter(|(dt, _)| (0.1..=0.9).contains(*dt)).map(|(_, e)| *e).collect();
    let plateau_spread = plateau.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - plateau.iter().cloned().fold(f64::INFINITY, f64::min);
    let (antipodal_ok, minimizer) = match &circle2_r40 {
        Some(res) => {
            let g = gap(res.chain.params());
            ((g - 0.5).abs() <= 5e-3 && (g - oracle).abs() <= 5e-3, g)
        }
        None => (false, f64::NAN),
    };
    detail.push(format!(
        "circle n=2 R=40: minimizer gap {minimizer:.5}, oracle argmin {oracle:.3}, oracle energy spread {spread:.3e}, \
         spread over gaps in [0.1, 0.9] {plateau_spread:.3e}"
    ));
    detail.extend(chains);
    Ok(outcome(
        signs_ok && interior_ok && decreasing_ok && antipodal_ok,
        format!(
            "signs {}, interior {}, decreasing {}, antipodal {} (gap {minimizer:.4})",
            signs_ok, interior_ok, decreasing_ok, antipodal_ok
        ),
        "all four sub-checks",
        "|t2 - t1 - 0.5| <= 5e-3, agreeing with the oracle",
        detail.join("; "),
    ))
}

type CheckFn = fn(&Session) -> Result<Outcome>;

const CHECKS: [CheckFn; 11] = [
    strip_spectrum,
    decay,
    nondegeneracy,
    geometric,
    splitting,
    truncation,
    projection,
    interaction,
    alternating,
    reduction,
    theorem_shape,
];

/// Runs one check; errors become failing records.
pub fn run_check(session: &Session, index: usize) -> CheckRecord {
    let start = Instant::now();
    let res = CHECKS[index](session);
    let runtime_s = start.elapsed().as_secs_f64();
    match res {
        Ok(o) => CheckRecord {
            id: CHECK_IDS[index],
            passed: o.passed,
            measured: o.measured,
            target: o.target,
            tolerance: o.tolerance,
            runtime_s,
            detail: o.detail,
        },
        Err(e) => CheckRecord {
            id: CHECK_IDS[index],
            passed: false,
            measured: "error".into(),
            target: String::new(),
            tolerance: String::new(),
            runtime_s,
            detail: e.to_string(),
        },
    }
}

/// Runs every check; failures of any kind end up in the records.
pub fn verify(cfg: &RunConfig) -> VerificationReport {
    let session = Session::new(cfg);
    let records = (0..CHECKS.len()).into_par_iter().map(|k| run_check(&session, k)).collect();
    VerificationReport { records }
}

/// `verify`: writes `verification.csv` and `verification_summary.txt`.
pub fn verify_stage(cfg: &RunConfig, out: &Path) -> Result<VerificationReport> {
    let report = verify(cfg);
    write_atomic(&out.join("verification.csv"), report.to_csv().as_bytes())?;
    write_atomic(&out.join("verification_summary.txt"), report.summary().as_bytes())?;
    Ok(report)
}
