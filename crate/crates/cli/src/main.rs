use clap::{Parser, Subcommand};
use multibump::pipeline::run::{assemble_stage, limit_stage, project_stage, reduce_stage, run_pipeline};
use multibump::pipeline::sweep::{loglog_slope, sweep_stage};
use multibump::pipeline::verify::verify_stage;
use multibump::pipeline::{parse_config, RunConfig};
use multibump::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

/// Alternating-sign multibump solutions on thin tubes around expanded curves.
#[derive(Parser)]
#[command(name = "multibump", version)]
struct Cli {
    /// Run configuration (TOML); defaults apply when omitted
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed` in the config
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for U+ and U- on the strip and write the profile cache
    LimitSolve,
    /// Project one bump onto the tube and measure it against U
    Project,
    /// Build phi_R(X) at the configured chain
    Assemble,
    /// Refine phi_R(X) in the normal space and report G_R
    Reduce,
    /// Minimize over chains, then refine the minimizer
    Minimize,
    /// Refine the configured chain for every R in the sweep
    Sweep,
    /// Run the verification suite
    Verify,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                line: 0,
                field: String::new(),
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn fmt(v: f64) -> String {
    format!("{v:.6e}")
}

fn run(cli: &Cli, cfg: &RunConfig, out: &Path) -> Result<u8, Error> {
    match cli.command {
        Command::LimitSolve => {
            let (p, art) = limit_stage(cfg, out)?;
            for (name, prof, fit) in [("U+", &p.plus, &p.fit_plus), ("U-", &p.minus, &p.fit_minus)] {
                println!(
                    "{name}: energy {} peak {} residual {} mu_fit {} (mu {})",
                    fmt(prof.energy()),
                    fmt(prof.peak()),
                    fmt(prof.residual()),
                    fmt(fit.mu_fit),
                    fmt(fit.mu)
                );
            }
            for f in art.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Project => {
            let rep = project_stage(cfg, out)?;
            println!(
                "R = {}: H1 distance {} in tube coordinates, {} ambient ({} outside the tube)",
                rep.r,
                fmt(rep.tube),
                fmt(rep.ambient),
                fmt(rep.ambient_outside)
            );
        }
        Command::Assemble => {
            let rep = assemble_stage(cfg, out)?;
            println!(
                "R = {} n = {}: J(phi) {} E_n {} remainder {} |grad J| {}",
                rep.r,
                rep.n,
                fmt(rep.j_phi.value),
                fmt(rep.e_n),
                fmt(rep.remainder),
                fmt(rep.grad_norm)
            );
        }
        Command::Reduce => {
            let (red, rep) = reduce_stage(cfg, out)?;
            println!(
                "R = {} n = {}: J(phi) {} G_R {} gap {} |grad J(phi)| {} contraction factor {} ({} steps)",
                rep.r,
                rep.n,
                fmt(rep.j_phi.value),
                fmt(rep.g_r),
                fmt(rep.gap),
                fmt(rep.grad_norm),
                fmt(red.contraction_factor),
                red.iterations
            );
        }
        Command::Minimize => {
            let s = run_pipeline(cfg, out)?;
            let m = &s.minimized;
            println!("chain t = {:?} after {} evaluations", m.chain.params(), m.evaluations);
            println!(
                "G_R {} J(phi) {} E_n {} slack {} relative correction {}",
                fmt(m.report.g_r),
                fmt(m.report.j_phi.value),
                fmt(m.report.e_n),
                fmt(m.admissibility.slack),
                fmt(s.relative_correction)
            );
        }
        Command::Sweep => {
            let rows = sweep_stage(cfg, out)?;
            for row in &rows {
                match &row.entry {
                    Ok(e) => println!(
                        "R = {}: G_R {} |grad J| {} gap {} relative correction {}",
                        row.r,
                        fmt(e.report.g_r),
                        fmt(e.report.grad_norm),
                        fmt(e.report.gap),
                        fmt(e.relative_correction)
                    ),
                    Err(err) => println!("R = {}: failed: {err}", row.r),
                }
            }
            if let Some(s) = loglog_slope(&rows, |e| e.report.grad_norm) {
                println!("log-log slope of |grad J(phi)|: {s:.4}");
            }
            if rows.iter().any(|r| r.entry.is_err()) {
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Verify => {
            let report = verify_stage(cfg, out)?;
            print!("{}", report.summary());
            if !report.passed() {
                return Ok(EXIT_VERIFICATION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match run(&cli, &cfg, &out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL })
        }
    }
}
