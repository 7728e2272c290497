//! The configured chain evaluated and refined across several `R`.

use super::config::RunConfig;
use super::run::{limit_profiles, projection_report, Profiles, ProjectionReport, Setup};
use crate::energy::reduction::{energy_report, normal_refine, EnergyReport};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::pde::export::format_sig9;
use crate::profile::decay::linear_fit;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub report: EnergyReport,
    pub relative_correction: f64,
    pub contraction_factor: f64,
    pub iterations: usize,
    pub min_normal_eigenvalue: f64,
    pub projection: ProjectionReport,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub r: f64,
    /// failures are kept so the sweep can continue
    pub entry: Result<SweepEntry>,
}

fn sweep_one(cfg: &RunConfig, profiles: &Profiles, r: f64) -> Result<SweepEntry> {
    let setup = Setup::new(cfg, profiles, r)?;
    let params = cfg.chain_params();
    let chain = setup.chain(&params)?;
    let red = normal_refine(&setup.ctx, &setup.fun, &chain, cfg.tol_reduce)?;
    let mut report = energy_report(&setup.ctx, &setup.fun, &chain, &red.base)?;
    report.g_r = red.g_r;
    report.gap = red.gap();
    let (_, projection) = projection_report(&setup, params.first().copied().unwrap_or(0.0))?;
    Ok(SweepEntry {
        relative_correction: red.relative_correction(&setup.fun),
        contraction_factor: red.contraction_factor,
        iterations: red.iterations,
        min_normal_eigenvalue: red.min_normal_eigenvalue,
        report,
        projection,
    })
}

/// One row per `R`, computed in parallel. Needs at least three values.
pub fn sweep_r(cfg: &RunConfig, profiles: &Profiles, rs: &[f64]) -> Result<Vec<SweepRow>> {
    if rs.len() < 3 {
        return Err(Error::RangeViolation(format!("a sweep needs at least 3 values of R, got {}", rs.len())));
    }
    Ok(rs
        .par_iter()
        .map(|&r| SweepRow { r, entry: sweep_one(cfg, profiles, r) })
        .collect())
}

const COLUMNS: [&str; 15] = [
    "R",
    "n",
    "E_n",
    "J_phi",
    "G_R",
    "remainder",
    "grad_norm",
    "gap",
    "remainder_over_max_I",
    "relative_correction",
    "contraction_factor",
    "min_normal_eigenvalue",
    "h1_tube",
    "h1_ambient",
    "status",
];

fn numeric(e: &SweepEntry) -> [f64; 12] {
    let rep = &e.report;
    let max_i = rep.max_abs_interaction();
    [
        rep.e_n,
        rep.j_phi.value,
        rep.g_r,
        rep.remainder,
        rep.grad_norm,
        rep.gap,
        if max_i > 0.0 { rep.remainder.abs() / max_i } else { f64::NAN },
        e.relative_correction,
        e.contraction_factor,
        e.min_normal_eigenvalue,
        e.projection.tube,
        e.projection.ambient,
    ]
}

/// Log-log slope of a positive column against `R` over the successful rows.
pub fn loglog_slope(rows: &[SweepRow], f: impl Fn(&SweepEntry) -> f64) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|row| row.entry.as_ref().ok().map(|e| (row.r, f(e))))
        .filter(|(_, y)| *y > 0.0 && y.is_finite())
        .map(|(r, y)| (r.ln(), y.ln()))
        .unzip();
    (xs.len() >= 2).then(|| linear_fit(&xs, &ys).0)
}

/// The sweep table followed by `# slope` comment lines.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(COLUMNS);
    for row in rows {
        let mut rec = vec![format_sig9(row.r)];
        match &row.entry {
            Ok(e) => {
                rec.push(e.report.n.to_string());
                rec.extend(numeric(e).iter().map(|v| format_sig9(*v)));
                rec.push("ok".into());
            }
            Err(err) => {
                rec.extend(std::iter::repeat_n(String::new(), COLUMNS.len() - 2));
                rec.push(err.to_string());
            }
        }
        let _ = w.write_record(&rec);
    }
    let mut s = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv");
    let slopes: [(&str, fn(&SweepEntry) -> f64); 6] = [
        ("grad_norm", |e| e.report.grad_norm),
        ("gap", |e| e.report.gap),
        ("relative_correction", |e| e.relative_correction),
        ("h1_tube", |e| e.projection.tube),
        ("h1_ambient", |e| e.projection.ambient),
        ("abs_remainder", |e| e.report.remainder.abs()),
    ];
    for (name, f) in slopes {
        let v = loglog_slope(rows, f).map_or("nan".to_string(), format_sig9);
        let _ = writeln!(s, "# slope {name} {v}");
    }
    s
}

/// `sweep`: writes `sweep.csv`; fails only if every `R` failed.
pub fn sweep_stage(cfg: &RunConfig, out: &Path) -> Result<Vec<SweepRow>> {
    if cfg.sweep_r.len() < 3 {
        return Err(Error::Config {
            line: 0,
            field: "sweep.r".into(),
            message: format!("a sweep needs at least 3 values of R, got {}", cfg.sweep_r.len()),
        });
    }
    let profiles = limit_profiles(cfg)?;
    let rows = sweep_r(cfg, &profiles, &cfg.sweep_r)?;
    write_atomic(&out.join("sweep.csv"), sweep_csv(&rows).as_bytes())?;
    if rows.iter().all(|r| r.entry.is_err()) {
        if let Some(Err(first)) = rows.first().map(|r| &r.entry) {
            return Err(first.clone());
        }
    }
    Ok(rows)
}
