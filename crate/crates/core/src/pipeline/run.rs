//! End-to-end runs: profiles, ansatz, reduction and minimization, with their
//! CSV artifacts.

use super::config::RunConfig;
use crate::ansatz::{anchor_node, AnsatzContext};
use crate::energy::reduction::{energy_report, normal_refine, EnergyReport, ReductionResult};
use crate::energy::{minimize_chain, Functional, MinimizeOptions, MinimizeResult, TraceRow};
use crate::error::{Error, Result};
use crate::geometry::{chain_from_params, make_curve, Chain, CurveSpec, SeparationScales};
use crate::io::write_atomic;
use crate::pde::export::{field_to_csv, format_sig9};
use crate::pde::grid::{build_strip_grid, Grid, GridField};
use crate::profile::cache::save_profile;
use crate::profile::ground_state::default_strip_half_length;
use crate::profile::truncation::h1_norm;
use crate::profile::{decay_rate, decay_rate_exact, solve_ground_state, BumpProfile, DecayFit};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// `U+`, `U-` and their fitted decay rates.
#[derive(Debug, Clone)]
pub struct Profiles {
    pub plus: Arc<BumpProfile>,
    pub minus: Arc<BumpProfile>,
    pub fit_plus: DecayFit,
    pub fit_minus: DecayFit,
}

pub fn strip_grid(cfg: &RunConfig) -> Result<Arc<Grid>> {
    let mu = decay_rate_exact(cfg.lambda);
    build_strip_grid(cfg.l_xi.unwrap_or_else(|| default_strip_half_length(mu, cfg.h)), cfg.h)
}

/// Solves for both profiles on the configured strip.
pub fn limit_profiles(cfg: &RunConfig) -> Result<Profiles> {
    let grid = strip_grid(cfg)?;
    let (plus, minus) = rayon::join(
        || solve_ground_state(&cfg.nonlinearity, cfg.lambda, 1, &grid),
        || solve_ground_state(&cfg.nonlinearity, cfg.lambda, -1, &grid),
    );
    let (plus, minus) = (plus?, minus?);
    let fit_plus = decay_rate(&plus, cfg.fit_window)?;
    let fit_minus = decay_rate(&minus, cfg.fit_window)?;
    Ok(Profiles { plus: Arc::new(plus), minus: Arc::new(minus), fit_plus, fit_minus })
}

/// Writes `profile/profile_{plus,minus}.{csv,meta}` and `limit_report.csv`.
pub fn write_profiles(out: &Path, p: &Profiles) -> Result<()> {
    let dir = out.join("profile");
    save_profile(&dir, &p.plus, p.fit_plus.mu_fit)?;
    save_profile(&dir, &p.minus, p.fit_minus.mu_fit)?;
    let mut s = String::from("sign,energy,peak,residual,newton_steps,mu,mu_fit,mu_rel_error\n");
    for (prof, fit) in [(&p.plus, &p.fit_plus), (&p.minus, &p.fit_minus)] {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            prof.sign(),
            format_sig9(prof.energy()),
            format_sig9(prof.peak()),
            format_sig9(prof.residual()),
            prof.newton_steps(),
            format_sig9(fit.mu),
            format_sig9(fit.mu_fit),
            format_sig9(fit.relative_error)
        );
    }
    write_atomic(&out.join("limit_report.csv"), s.as_bytes())
}

/// Ansatz context and energy functional for one `R`.
pub struct Setup {
    pub curve: CurveSpec,
    pub ctx: AnsatzContext,
    pub fun: Functional,
    pub scales: SeparationScales,
}

impl Setup {
    pub fn new(cfg: &RunConfig, profiles: &Profiles, r: f64) -> Result<Self> {
        let curve = make_curve(&cfg.curve)?;
        let mut ctx = AnsatzContext::new(&curve, r, profiles.plus.clone(), profiles.minus.clone())?;
        if let Some(w) = cfg.window {
            ctx = ctx.with_window_half_length(w)?;
        }
        let fun = Functional::new(ctx.grid().clone(), cfg.lambda, cfg.nonlinearity)?;
        let scales = SeparationScales::new(profiles.plus.mu(), cfg.nonlinearity.alpha_prime(), r)?;
        Ok(Setup { curve, ctx, fun, scales })
    }

    pub fn chain(&self, params: &[f64]) -> Result<Chain> {
        chain_from_params(&self.curve, self.ctx.r(), params)
    }

    pub fn open(&self) -> bool {
        !self.curve.closed()
    }
}

pub const ENERGY_REPORT_HEADER: &str = "R,n,E_n,J_phi,G_R,remainder,grad_norm";

pub fn energy_report_row(rep: &EnergyReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        format_sig9(rep.r),
        rep.n,
        format_sig9(rep.e_n),
        format_sig9(rep.j_phi.value),
        format_sig9(rep.g_r),
        format_sig9(rep.remainder),
        format_sig9(rep.grad_norm)
    )
}

pub fn trace_csv(n: usize, trace: &[TraceRow]) -> String {
    let mut s = String::from("iter");
    for i in 1..=n {
        let _ = write!(s, ",t{i}");
    }
    s.push_str(",J_phi,min_sep,boundary_dist\n");
    for row in trace {
        let _ = write!(s, "{}", row.iter);
        for t in &row.t {
            let _ = write!(s, ",{}", format_sig9(*t));
        }
        let _ = writeln!(s, ",{},{},{}", format_sig9(row.j_phi), format_sig9(row.min_sep), format_sig9(row.boundary_dist));
    }
    s
}

/// Value of `field` at the centre-line node nearest each anchor.
pub fn anchor_values(grid: &Grid, field: &GridField, chain: &Chain) -> Vec<f64> {
    chain
        .arc_positions()
        .iter()
        .map(|&s0| {
            let (c, j) = anchor_node(grid, s0);
            field.at(c, j)
        })
        .collect()
}

/// Fails with `SignPatternBroken` unless every anchor carries its chain sign.
pub fn check_anchor_signs(grid: &Grid, field: &GridField, chain: &Chain) -> Result<()> {
    for (index, (v, &sign)) in anchor_values(grid, field, chain).into_iter().zip(chain.signs()).enumerate() {
        if v * sign as f64 <= 0.0 {
            return Err(Error::SignPatternBroken { index, expected: sign, value: v });
        }
    }
    Ok(())
}

fn chain_csv(setup: &Setup, chain: &Chain, field: &GridField) -> String {
    let mut s = String::from("i,t,sign,s,x,y,value\n");
    let values = anchor_values(setup.ctx.grid(), field, chain);
    for i in 0..chain.len() {
        let p = chain.points()[i];
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            i + 1,
            format_sig9(chain.params()[i]),
            chain.signs()[i],
            format_sig9(chain.arc_positions()[i]),
            format_sig9(p[0]),
            format_sig9(p[1]),
            format_sig9(values[i])
        );
    }
    s
}

/// Files written by a stage.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        write_atomic(&path, contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }
}

/// `limit-solve`: both profiles with their cache files.
pub fn limit_stage(cfg: &RunConfig, out: &Path) -> Result<(Profiles, Artifacts)> {
    let p = limit_profiles(cfg)?;
    write_profiles(out, &p)?;
    let mut art = Artifacts::default();
    for name in ["profile/profile_plus.csv", "profile/profile_minus.csv", "limit_report.csv"] {
        art.files.push(out.join(name));
    }
    Ok((p, art))
}

/// Distances of a projected bump from its unprojected copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionReport {
    pub r: f64,
    pub t0: f64,
    /// H^1 distance to `U` placed in tube coordinates
    pub tube: f64,
    pub ambient_inside: f64,
    pub ambient_outside: f64,
    pub ambient: f64,
}

/// Projects a positive bump at curve parameter `t0` and measures it against `U`.
pub fn projection_report(setup: &Setup, t0: f64) -> Result<(GridField, ProjectionReport)> {
    let ctx = &setup.ctx;
    let grid = ctx.grid();
    let s0 = ctx.anchor(t0);
    let placed = ctx.place_at(s0, 1)?;
    let v = ctx.project_at(s0, 1)?.v.embed_into(grid)?;
    let u = placed.on_parent(grid)?;
    let tube = h1_norm(&v.axpy(-1.0, &u));
    let amb = crate::ansatz::ambient_h1_distance(&v, ctx.source(1), &setup.curve, ctx.r(), t0, ctx.window_half_length())?;
    Ok((
        v,
        ProjectionReport {
            r: ctx.r(),
            t0,
            tube,
            ambient_inside: amb.inside,
            ambient_outside: amb.outside,
            ambient: amb.total,
        },
    ))
}

/// `project`: the first chain point's bump and its distance report.
pub fn project_stage(cfg: &RunConfig, out: &Path) -> Result<ProjectionReport> {
    let p = limit_profiles(cfg)?;
    let setup = Setup::new(cfg, &p, cfg.run_r())?;
    let t0 = cfg.chain_params().first().copied().unwrap_or(0.0);
    let (v, rep) = projection_report(&setup, t0)?;
    let mut art = Artifacts::default();
    art.write(out.join("projection.csv"), &field_to_csv(&v))?;
    art.write(
        out.join("projection_report.csv"),
        &format!(
            "R,t0,h1_tube,h1_ambient_inside,h1_ambient_outside,h1_ambient\n{},{},{},{},{},{}\n",
            format_sig9(rep.r),
            format_sig9(rep.t0),
            format_sig9(rep.tube),
            format_sig9(rep.ambient_inside),
            format_sig9(rep.ambient_outside),
            format_sig9(rep.ambient)
        ),
    )?;
    Ok(rep)
}

/// `assemble`: `phi_R(X)` at the configured chain, without reduction.
pub fn assemble_stage(cfg: &RunConfig, out: &Path) -> Result<EnergyReport> {
    let p = limit_profiles(cfg)?;
    let setup = Setup::new(cfg, &p, cfg.run_r())?;
    let chain = setup.chain(&cfg.chain_params())?;
    let phi = setup.ctx.phi(&chain)?;
    let rep = energy_report(&setup.ctx, &setup.fun, &chain, &phi.field)?;
    let mut art = Artifacts::default();
    art.write(out.join("phi.csv"), &field_to_csv(&phi.field))?;
    art.write(out.join("chain.csv"), &chain_csv(&setup, &chain, &phi.field))?;
    art.write(out.join("energy_report.csv"), &format!("{ENERGY_REPORT_HEADER}\n{}\n", energy_report_row(&rep)))?;
    Ok(rep)
}

fn reduction_report(setup: &Setup, chain: &Chain, red: &ReductionResult) -> Result<EnergyReport> {
    let mut rep = energy_report(&setup.ctx, &setup.fun, chain, &red.base)?;
    rep.g_r = red.g_r;
    rep.gap = red.gap();
    Ok(rep)
}

fn reduction_csv(red: &ReductionResult, rel: f64) -> String {
    let mut s = String::from("iter,normal_grad\n");
    for (k, g) in red.history.iter().enumerate() {
        let _ = writeln!(s, "{k},{}", format_sig9(*g));
    }
    let _ = writeln!(
        s,
        "# contraction_factor={} w_norm={} relative_correction={} min_normal_eigenvalue={} trust_radius={}",
        format_sig9(red.contraction_factor),
        format_sig9(red.w_norm),
        format_sig9(rel),
        format_sig9(red.min_normal_eigenvalue),
        format_sig9(red.trust_radius)
    );
    s
}

fn write_reduction(out: &Path, setup: &Setup, chain: &Chain, red: &ReductionResult, rep: &EnergyReport) -> Result<()> {
    let mut art = Artifacts::default();
    art.write(out.join("phi.csv"), &field_to_csv(&red.base))?;
    art.write(out.join("v_u.csv"), &field_to_csv(&red.refined))?;
    art.write(out.join("chain.csv"), &chain_csv(setup, chain, &red.refined))?;
    art.write(out.join("energy_report.csv"), &format!("{ENERGY_REPORT_HEADER}\n{}\n", energy_report_row(rep)))?;
    art.write(out.join("reduction.csv"), &reduction_csv(red, red.relative_correction(&setup.fun)))?;
    Ok(())
}

/// `reduce`: normal refinement at the configured chain.
pub fn reduce_stage(cfg: &RunConfig, out: &Path) -> Result<(ReductionResult, EnergyReport)> {
    let p = limit_profiles(cfg)?;
    let setup = Setup::new(cfg, &p, cfg.run_r())?;
    let chain = setup.chain(&cfg.chain_params())?;
    let red = normal_refine(&setup.ctx, &setup.fun, &chain, cfg.tol_reduce)?;
    let rep = reduction_report(&setup, &chain, &red)?;
    write_reduction(out, &setup, &chain, &red, &rep)?;
    check_anchor_signs(setup.ctx.grid(), &red.refined, &chain)?;
    Ok((red, rep))
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub profiles: Profiles,
    pub minimized: MinimizeResult,
    pub relative_correction: f64,
    pub anchor_values: Vec<f64>,
}

/// Minimizes over chains from a given start and refines the minimizer.
pub fn minimize_on(setup: &Setup, initial: &[f64], tol_reduce: f64) -> Result<MinimizeResult> {
    let chain = setup.chain(initial)?;
    let mut res = minimize_chain(&setup.ctx, &setup.fun, &chain, &setup.scales, setup.open(), &MinimizeOptions::default())?;
    if tol_reduce != crate::energy::TOL_REDUCE {
        let red = normal_refine(&setup.ctx, &setup.fun, &res.chain, tol_reduce)?;
        res.report = reduction_report(setup, &res.chain, &red)?;
        res.reduction = red;
    }
    Ok(res)
}

/// `minimize` and the default pipeline: profiles, chain minimization,
/// reduction at the minimizer and all artifacts.
pub fn run_pipeline(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let (profiles, _) = limit_stage(cfg, out)?;
    let setup = Setup::new(cfg, &profiles, cfg.run_r())?;
    let res = minimize_on(&setup, &cfg.chain_params(), cfg.tol_reduce)?;
    write_reduction(out, &setup, &res.chain, &res.reduction, &res.report)?;
    write_atomic(&out.join("trace.csv"), trace_csv(res.chain.len(), &res.trace).as_bytes())?;
    let anchors = anchor_values(setup.ctx.grid(), &res.reduction.refined, &res.chain);
    check_anchor_signs(setup.ctx.grid(), &res.reduction.refined, &res.chain)?;
    Ok(RunSummary {
        relative_correction: res.reduction.relative_correction(&setup.fun),
        profiles,
        minimized: res,
        anchor_values: anchors,
    })
}
