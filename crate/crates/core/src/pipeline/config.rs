//! Run configuration: a small TOML file with `[curve]`, `[physics]`,
//! `[discretization]`, `[chain]`, `[sweep]` and `[tolerance]` tables plus
//! top-level `seed` and `out`. TOML integers are signed 64-bit, so seeds
//! from a file stay below 2^63; `--seed` on the command line takes any u64.
//!
//! ```toml
//! seed = 1
//! out = "out"
//!
//! [curve]
//! kind = "circle"      # circle | segment | spline
//! center = [0, 0]
//! radius = 1
//!
//! [physics]
//! lambda = 1
//! nonlinearity = "power"   # power (p) | two-power (p_plus, p_minus)
//! p = 3
//!
//! [discretization]
//! h = 0.05
//! l_xi = "auto"
//! window = "auto"
//!
//! [chain]
//! n = 2
//! t = "auto"           # or a list of parameters in [0, 1)
//! r = 40               # defaults to the first sweep value
//!
//! [sweep]
//! r = [20, 40, 80]
//!
//! [tolerance]
//! tol_reduce = 1e-8
//! fit_window = [4, 8]
//! ```

use crate::error::{Error, Result};
use crate::geometry::{CurveKind, CurveSource, Point};
use crate::profile::{NonlinearityKind, NonlinearitySpec, LAMBDA_11};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curve: CurveSource,
    pub lambda: f64,
    pub nonlinearity: NonlinearitySpec,
    pub h: f64,
    /// strip half-length; `None` picks the default for the decay rate
    pub l_xi: Option<f64>,
    /// bump window half-length; `None` picks the default
    pub window: Option<f64>,
    pub n: usize,
    /// chain parameters; `None` means equispaced
    pub t: Option<Vec<f64>>,
    /// expansion factor of single runs; `None` takes the first sweep value
    pub r: Option<f64>,
    pub sweep_r: Vec<f64>,
    pub tol_reduce: f64,
    pub fit_window: (f64, f64),
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            curve: CurveSource::circle([0.0, 0.0], 1.0),
            lambda: 1.0,
            nonlinearity: NonlinearitySpec::cubic(),
            h: 0.05,
            l_xi: None,
            window: None,
            n: 2,
            t: None,
            r: None,
            sweep_r: vec![20.0, 40.0, 80.0],
            tol_reduce: 1e-8,
            fit_window: (4.0, 8.0),
            seed: 0,
            out: None,
        }
    }
}

impl RunConfig {
    /// Expansion factor of single runs.
    pub fn run_r(&self) -> f64 {
        self.r.unwrap_or(self.sweep_r[0])
    }

    /// Chain parameters: the configured list or `n` equispaced points
    /// (`i / n` on closed curves, `(i + 1/2) / n` on open ones).
    pub fn chain_params(&self) -> Vec<f64> {
        match &self.t {
            Some(t) => t.clone(),
            None => {
                let n = self.n as f64;
                let shift = if self.curve.closed { 0.0 } else { 0.5 };
                (0..self.n).map(|i| (i as f64 + shift) / n).collect()
            }
        }
    }

    /// TOML text that parses back to this configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {:?}", out.to_string_lossy());
        }
        let pt = |p: &Point| format!("[{:?}, {:?}]", p[0], p[1]);
        let _ = writeln!(s, "\n[curve]");
        match &self.curve.kind {
            CurveKind::Circle { center, radius } => {
                let _ = writeln!(s, "kind = \"circle\"\ncenter = {}\nradius = {radius:?}", pt(center));
            }
            CurveKind::Segment { start, end } => {
                let _ = writeln!(s, "kind = \"segment\"\nstart = {}\nend = {}", pt(start), pt(end));
            }
            CurveKind::Spline { knots } => {
                let list: Vec<String> = knots.iter().map(pt).collect();
                let _ = writeln!(s, "kind = \"spline\"\nknots = [{}]\nclosed = {}", list.join(", "), self.curve.closed);
            }
        }
        let _ = writeln!(s, "\n[physics]\nlambda = {:?}", self.lambda);
        match self.nonlinearity.kind() {
            NonlinearityKind::Power { p } => {
                let _ = writeln!(s, "nonlinearity = \"power\"\np = {p:?}");
            }
            NonlinearityKind::TwoPower { p_plus, p_minus } => {
                let _ = writeln!(s, "nonlinearity = \"two-power\"\np_plus = {p_plus:?}\np_minus = {p_minus:?}");
            }
        }
        let _ = writeln!(s, "alpha_prime = {:?}", self.nonlinearity.alpha_prime());
        let auto = |v: Option<f64>| v.map_or("\"auto\"".to_string(), |x| format!("{x:?}"));
        let _ = writeln!(s, "\n[discretization]\nh = {:?}\nl_xi = {}\nwindow = {}", self.h, auto(self.l_xi), auto(self.window));
        let _ = writeln!(s, "\n[chain]\nn = {}", self.n);
        match &self.t {
            Some(t) => {
                let list: Vec<String> = t.iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(s, "t = [{}]", list.join(", "));
            }
            None => {
                let _ = writeln!(s, "t = \"auto\"");
            }
        }
        if let Some(r) = self.r {
            let _ = writeln!(s, "r = {r:?}");
        }
        let rs: Vec<String> = self.sweep_r.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "\n[sweep]\nr = [{}]", rs.join(", "));
        let _ = writeln!(
            s,
            "\n[tolerance]\ntol_reduce = {:?}\nfit_window = [{:?}, {:?}]",
            self.tol_reduce, self.fit_window.0, self.fit_window.1
        );
        s
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out: Option<String>,
    curve: Option<RawCurve>,
    physics: Option<RawPhysics>,
    discretization: Option<RawDiscretization>,
    chain: Option<RawChain>,
    sweep: Option<RawSweep>,
    tolerance: Option<RawTolerance>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    kind: String,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    start: Option<[f64; 2]>,
    end: Option<[f64; 2]>,
    knots: Option<Vec<[f64; 2]>>,
    closed: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    lambda: Option<f64>,
    nonlinearity: Option<String>,
    p: Option<f64>,
    p_plus: Option<f64>,
    p_minus: Option<f64>,
    alpha_prime: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    h: Option<f64>,
    l_xi: Option<toml::Value>,
    window: Option<toml::Value>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawChain {
    n: Option<usize>,
    t: Option<toml::Value>,
    r: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    r: Option<Vec<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTolerance {
    tol_reduce: Option<f64>,
    fit_window: Option<[f64; 2]>,
}

/// Finds the line of `section.key` in the source for error messages.
struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn line(&self, section: &str, key: &str) -> usize {
        let mut current = String::new();
        let mut section_line = 0;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('[') {
                current = rest.trim_end_matches(']').trim().to_string();
                if current == section {
                    section_line = i + 1;
                }
                continue;
            }
            let lhs = line.split('=').next().unwrap_or("").trim();
            if current == section && lhs == key {
                return i + 1;
            }
        }
        section_line
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        let field = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        Error::Config { line: self.line(section, key), field, message: message.into() }
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// `"auto"` or a positive number.
fn auto_or_positive(loc: &Locator, section: &str, key: &str, v: Option<&toml::Value>) -> Result<Option<f64>> {
    match v {
        None => Ok(None),
        Some(toml::Value::String(s)) if s == "auto" => Ok(None),
        Some(toml::Value::Float(x)) if *x > 0.0 && x.is_finite() => Ok(Some(*x)),
        Some(toml::Value::Integer(x)) if *x > 0 => Ok(Some(*x as f64)),
        Some(other) => Err(loc.err(section, key, format!("expected \"auto\" or a positive number, got {other}"))),
    }
}

fn positive(loc: &Locator, section: &str, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(loc.err(section, key, format!("must be positive and finite, got {v}")))
    }
}

fn finite_point(loc: &Locator, key: &str, p: [f64; 2]) -> Result<Point> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(p)
    } else {
        Err(loc.err("curve", key, "coordinates must be finite"))
    }
}

fn parse_curve(loc: &Locator, raw: Option<RawCurve>) -> Result<CurveSource> {
    let Some(c) = raw else {
        return Ok(CurveSource::circle([0.0, 0.0], 1.0));
    };
    let require = |v: Option<[f64; 2]>, key: &str| -> Result<Point> {
        finite_point(loc, key, v.ok_or_else(|| loc.err("curve", key, format!("required for kind = \"{}\"", c.kind)))?)
    };
    let unexpected = |present: bool, key: &str| -> Result<()> {
        if present {
            Err(loc.err("curve", key, format!("not used by kind = \"{}\"", c.kind)))
        } else {
            Ok(())
        }
    };
    match c.kind.as_str() {
        "circle" => {
            unexpected(c.start.is_some(), "start")?;
            unexpected(c.end.is_some(), "end")?;
            unexpected(c.knots.is_some(), "knots")?;
            if c.closed == Some(false) {
                return Err(loc.err("curve", "closed", "a circle is closed"));
            }
            let center = match c.center {
                Some(p) => finite_point(loc, "center", p)?,
                None => [0.0, 0.0],
            };
            let radius = positive(loc, "curve", "radius", c.radius.unwrap_or(1.0))?;
            Ok(CurveSource::circle(center, radius))
        }
        "segment" => {
            unexpected(c.center.is_some(), "center")?;
            unexpected(c.radius.is_some(), "radius")?;
            unexpected(c.knots.is_some(), "knots")?;
            if c.closed == Some(true) {
                return Err(loc.err("curve", "closed", "a segment is open"));
            }
            let start = require(c.start, "start")?;
            let end = require(c.end, "end")?;
            if start == end {
                return Err(loc.err("curve", "end", "segment has zero length"));
            }
            Ok(CurveSource::segment(start, end))
        }
        "spline" => {
            unexpected(c.center.is_some(), "center")?;
            unexpected(c.radius.is_some(), "radius")?;
            unexpected(c.start.is_some(), "start")?;
            unexpected(c.end.is_some(), "end")?;
            let knots = c.knots.clone().ok_or_else(|| loc.err("curve", "knots", "required for kind = \"spline\""))?;
            if knots.len() < 3 {
                return Err(loc.err("curve", "knots", format!("need at least 3 knots, got {}", knots.len())));
            }
            let knots = knots.into_iter().map(|p| finite_point(loc, "knots", p)).collect::<Result<Vec<_>>>()?;
            Ok(CurveSource::spline(knots, c.closed.unwrap_or(false)))
        }
        other => Err(loc.err("curve", "kind", format!("unknown curve kind \"{other}\" (circle, segment, spline)"))),
    }
}

fn parse_physics(loc: &Locator, raw: Option<RawPhysics>) -> Result<(f64, NonlinearitySpec)> {
    let p = raw.unwrap_or_default();
    let lambda = p.lambda.unwrap_or(1.0);
    if !lambda.is_finite() || lambda <= -LAMBDA_11 {
        return Err(loc.err(
            "physics",
            "lambda",
            format!("lambda = {lambda} must exceed -pi^2/4 = {:.6}: -Delta + lambda is not coercive otherwise", -LAMBDA_11),
        ));
    }
    let kind = match p.nonlinearity.as_deref().unwrap_or("power") {
        "power" => {
            if p.p_plus.is_some() || p.p_minus.is_some() {
                return Err(loc.err("physics", "p_plus", "p_plus/p_minus need nonlinearity = \"two-power\""));
            }
            NonlinearityKind::Power { p: p.p.unwrap_or(3.0) }
        }
        "two-power" => {
            if p.p.is_some() {
                return Err(loc.err("physics", "p", "use p_plus and p_minus with nonlinearity = \"two-power\""));
            }
            let get = |v: Option<f64>, key: &str| v.ok_or_else(|| loc.err("physics", key, "required for two-power"));
            NonlinearityKind::TwoPower { p_plus: get(p.p_plus, "p_plus")?, p_minus: get(p.p_minus, "p_minus")? }
        }
        other => {
            return Err(loc.err("physics", "nonlinearity", format!("unknown nonlinearity \"{other}\" (power, two-power)")))
        }
    };
    let spec = match p.alpha_prime {
        Some(a) => NonlinearitySpec::with_alpha_prime(kind, a).map_err(|e| loc.err("physics", "alpha_prime", e.to_string())),
        None => NonlinearitySpec::new(kind).map_err(|e| {
            let key = if matches!(kind, NonlinearityKind::Power { .. }) { "p" } else { "p_plus" };
            loc.err("physics", key, e.to_string())
        }),
    }?;
    Ok((lambda, spec))
}

fn parse_params(loc: &Locator, v: Option<&toml::Value>) -> Result<Option<Vec<f64>>> {
    let bad = |msg: String| loc.err("chain", "t", msg);
    match v {
        None => Ok(None),
        Some(toml::Value::String(s)) if s == "auto" => Ok(None),
        Some(toml::Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let x = match item {
                    toml::Value::Float(x) => *x,
                    toml::Value::Integer(x) => *x as f64,
                    other => return Err(bad(format!("expected numbers, got {other}"))),
                };
                if !(0.0..1.0).contains(&x) {
                    return Err(bad(format!("parameter {x} outside [0, 1)")));
                }
                if out.last().is_some_and(|prev| *prev >= x) {
                    return Err(bad("parameters must be strictly increasing".into()));
                }
                out.push(x);
            }
            Ok(Some(out))
        }
        Some(other) => Err(bad(format!("expected \"auto\" or a list, got {other}"))),
    }
}

/// Parses and validates a configuration. Every error names the offending
/// line and field.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let loc = Locator { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of_offset(text, s.start));
        Error::Config { line, field: String::new(), message: e.message().to_string() }
    })?;
    let defaults = RunConfig::default();

    let curve = parse_curve(&loc, raw.curve)?;
    let (lambda, nonlinearity) = parse_physics(&loc, raw.physics)?;

    let d = raw.discretization.unwrap_or_default();
    let h = positive(&loc, "discretization", "h", d.h.unwrap_or(defaults.h))?;
    if h > 0.5 + 1e-12 {
        return Err(loc.err("discretization", "h", format!("h = {h} leaves no interior rows across the tube")));
    }
    let l_xi = auto_or_positive(&loc, "discretization", "l_xi", d.l_xi.as_ref())?;
    let window = auto_or_positive(&loc, "discretization", "window", d.window.as_ref())?;
    if let (Some(l), Some(w)) = (l_xi, window) {
        if w > l - 1.0 {
            return Err(loc.err("discretization", "window", format!("window {w} exceeds l_xi - 1 = {}", l - 1.0)));
        }
    }

    let c = raw.chain.unwrap_or_default();
    let t = parse_params(&loc, c.t.as_ref())?;
    let n = match (c.n, &t) {
        (Some(n), Some(t)) if n != t.len() => {
            return Err(loc.err("chain", "n", format!("n = {n} but t lists {} parameters", t.len())))
        }
        (Some(n), _) => n,
        (None, Some(t)) => t.len(),
        (None, None) => defaults.n,
    };
    if curve.closed && n % 2 == 1 {
        return Err(loc.err("chain", "n", format!("a closed curve carries only even chains (n = 2k), got n = {n}")));
    }
    let r = c.r.map(|r| positive(&loc, "chain", "r", r)).transpose()?;

    let sweep_r = raw.sweep.and_then(|s| s.r).unwrap_or(defaults.sweep_r);
    if sweep_r.is_empty() {
        return Err(loc.err("sweep", "r", "at least one R is required"));
    }
    for w in sweep_r.windows(2) {
        if !(w[1] > w[0]) {
            return Err(loc.err("sweep", "r", "R values must be strictly ascending"));
        }
    }
    if !sweep_r.iter().all(|r| *r > 1.0 && r.is_finite()) {
        return Err(loc.err("sweep", "r", "R values must be finite and exceed 1"));
    }
    if let Some(r) = r {
        if r <= 1.0 {
            return Err(loc.err("chain", "r", "R must exceed 1"));
        }
    }

    let tol = raw.tolerance.unwrap_or_default();
    let tol_reduce = positive(&loc, "tolerance", "tol_reduce", tol.tol_reduce.unwrap_or(defaults.tol_reduce))?;
    let fw = tol.fit_window.unwrap_or([defaults.fit_window.0, defaults.fit_window.1]);
    if !(fw[0] > 0.0 && fw[1] > fw[0] && fw[1].is_finite()) {
        return Err(loc.err("tolerance", "fit_window", format!("need 0 < a < b, got [{}, {}]", fw[0], fw[1])));
    }

    Ok(RunConfig {
        curve,
        lambda,
        nonlinearity,
        h,
        l_xi,
        window,
        n,
        t,
        r,
        sweep_r,
        tol_reduce,
        fit_window: (fw[0], fw[1]),
        seed: raw.seed.unwrap_or(defaults.seed),
        out: raw.out.map(PathBuf::from),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> (usize, String) {
        match err {
            Error::Config { line, field, .. } => (line, field),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn integers_are_accepted_where_floats_are_expected() {
        let c = parse_config("[curve]\nkind = \"circle\"\nradius = 2\n[sweep]\nr = [20, 40, 80]\n").unwrap();
        assert_eq!(c.curve, CurveSource::circle([0.0, 0.0], 2.0));
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.curve = CurveSource::segment([0.0, 0.0], [1.0, 0.5]);
        c.n = 3;
        c.t = Some(vec![0.2, 0.5, 0.8]);
        c.l_xi = Some(12.0);
        c.r = Some(33.0);
        c.out = Some("runs/a".into());
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(parse_config(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn lambda_below_strip_threshold_is_rejected() {
        let (line, field) = field_of(parse_config("seed = 1\n\n[physics]\nlambda = -2.5\n").unwrap_err());
        assert_eq!((line, field.as_str()), (4, "physics.lambda"));
    }

    #[test]
    fn odd_chain_on_closed_curve_is_rejected() {
        let (line, field) = field_of(parse_config("[chain]\nn = 3\n").unwrap_err());
        assert_eq!((line, field.as_str()), (2, "chain.n"));
        assert!(parse_config("[curve]\nkind = \"segment\"\nstart = [0, 0]\nend = [1, 0]\n[chain]\nn = 3\n").is_ok());
    }

    #[test]
    fn syntax_and_unknown_keys_report_lines() {
        let (line, _) = field_of(parse_config("seed = 1\n[physics]\nlamda = 1\n").unwrap_err());
        assert_eq!(line, 3);
        let (line, _) = field_of(parse_config("seed = 1\nout = \n").unwrap_err());
        assert_eq!(line, 2);
    }

    #[test]
    fn sweep_must_ascend() {
        let (_, field) = field_of(parse_config("[sweep]\nr = [40, 20]\n").unwrap_err());
        assert_eq!(field, "sweep.r");
    }

    #[test]
    fn auto_chain_is_equispaced() {
        let c = parse_config("[chain]\nn = 4\n").unwrap();
        assert_eq!(c.chain_params(), vec![0.0, 0.25, 0.5, 0.75]);
        let s = parse_config("[curve]\nkind = \"segment\"\nstart = [0, 0]\nend = [1, 0]\n[chain]\nn = 2\n").unwrap();
        assert_eq!(s.chain_params(), vec![0.25, 0.75]);
    }
}
