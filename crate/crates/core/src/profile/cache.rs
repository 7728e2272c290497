//! On-disk profile cache: a field CSV plus a `key=value` metadata sidecar.

use super::ground_state::{finish_profile, newton_polish, BumpProfile, PROFILE_RESIDUAL_TOL};
use super::nonlinearity::{NonlinearityKind, NonlinearitySpec};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::pde::export::{field_from_table, field_to_csv, parse_field_csv};
use crate::pde::grid::Grid;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    pub sign: i8,
    pub lambda: f64,
    pub p: f64,
    /// exponent of the negative branch when it differs from `p`
    pub p_minus: Option<f64>,
    pub h: f64,
    pub l_xi: f64,
    pub mu: f64,
    pub mu_fit: f64,
    pub energy: f64,
    pub residual: f64,
}

impl ProfileMeta {
    pub fn from_profile(profile: &BumpProfile, mu_fit: f64) -> Self {
        let (p, p_minus) = match profile.nonlinearity().kind() {
            NonlinearityKind::Power { p } => (p, None),
            NonlinearityKind::TwoPower { p_plus, p_minus } => (p_plus, Some(p_minus)),
        };
        ProfileMeta {
            sign: profile.sign(),
            lambda: profile.lambda(),
            p,
            p_minus,
            h: profile.grid().heta(),
            l_xi: profile.half_length(),
            mu: profile.mu(),
            mu_fit,
            energy: profile.energy(),
            residual: profile.residual(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sign={}", self.sign);
        let _ = writeln!(s, "lambda={:?}", self.lambda);
        let _ = writeln!(s, "p={:?}", self.p);
        if let Some(pm) = self.p_minus {
            let _ = writeln!(s, "p_minus={pm:?}");
        }
        let _ = writeln!(s, "h={:?}", self.h);
        let _ = writeln!(s, "L_xi={:?}", self.l_xi);
        let _ = writeln!(s, "mu={:?}", self.mu);
        let _ = writeln!(s, "mu_fit={:?}", self.mu_fit);
        let _ = writeln!(s, "energy={:?}", self.energy);
        let _ = writeln!(s, "residual={:?}", self.residual);
        s
    }

    /// Whether a cached profile was computed for the same problem and grid.
    pub fn matches(&self, nl: &NonlinearitySpec, lambda: f64, sign: i8, grid: &Grid) -> bool {
        let other = match nl.kind() {
            NonlinearityKind::Power { p } => (p, None),
            NonlinearityKind::TwoPower { p_plus, p_minus } => (p_plus, Some(p_minus)),
        };
        let l = -grid.s_origin() + grid.hs();
        self.sign == sign
            && self.lambda == lambda
            && (self.p, self.p_minus) == other
            && self.h == grid.heta()
            && (self.l_xi - l).abs() <= 1e-9 * l
    }
}

pub fn parse_profile_meta(text: &str) -> Result<ProfileMeta> {
    let mut sign = None;
    let mut vals: [Option<f64>; 8] = [None; 8];
    let mut p_minus = None;
    const KEYS: [&str; 8] = ["lambda", "p", "h", "L_xi", "mu", "mu_fit", "energy", "residual"];
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", ln + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "sign" {
            sign = Some(match v {
                "1" | "+1" | "+" => 1,
                "-1" | "-" => -1,
                _ => return Err(Error::Parse(format!("line {}: bad sign `{v}`", ln + 1))),
            });
            continue;
        }
        let num: f64 = v.parse().map_err(|_| Error::Parse(format!("line {}: `{v}` is not a number", ln + 1)))?;
        if k == "p_minus" {
            p_minus = Some(num);
            continue;
        }
        let slot = KEYS
            .iter()
            .position(|key| *key == k)
            .ok_or_else(|| Error::Parse(format!("line {}: unknown key `{k}`", ln + 1)))?;
        if vals[slot].replace(num).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key `{k}`", ln + 1)));
        }
    }
    let get = |i: usize| vals[i].ok_or_else(|| Error::Parse(format!("missing key `{}`", KEYS[i])));
    Ok(ProfileMeta {
        sign: sign.ok_or_else(|| Error::Parse("missing key `sign`".into()))?,
        lambda: get(0)?,
        p: get(1)?,
        p_minus,
        h: get(2)?,
        l_xi: get(3)?,
        mu: get(4)?,
        mu_fit: get(5)?,
        energy: get(6)?,
        residual: get(7)?,
    })
}

fn paths(dir: &Path, sign: i8) -> (PathBuf, PathBuf) {
    let stem = if sign > 0 { "profile_plus" } else { "profile_minus" };
    (dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.meta")))
}

pub fn save_profile(dir: &Path, profile: &BumpProfile, mu_fit: f64) -> Result<()> {
    let (csv, meta) = paths(dir, profile.sign());
    write_atomic(&csv, field_to_csv(profile.field()).as_bytes())?;
    write_atomic(&meta, ProfileMeta::from_profile(profile, mu_fit).to_text().as_bytes())
}

/// Loads a cached profile if one matches; the stored 9-digit values are
/// re-polished by Newton before use.
pub fn load_profile(
    dir: &Path,
    nl: &NonlinearitySpec,
    lambda: f64,
    sign: i8,
    grid: &Arc<Grid>,
) -> Result<Option<BumpProfile>> {
    let (csv, meta) = paths(dir, sign);
    let Ok(meta_text) = std::fs::read_to_string(&meta) else {
        return Ok(None);
    };
    let meta = parse_profile_meta(&meta_text)?;
    if !meta.matches(nl, lambda, sign, grid) {
        return Ok(None);
    }
    let table = parse_field_csv(&std::fs::read_to_string(&csv)?)?;
    let field = field_from_table(grid, &table)?;
    let (u, steps) = newton_polish(grid, lambda, nl, field.into_values(), 0.05 * PROFILE_RESIDUAL_TOL)?;
    finish_profile(grid, lambda, nl, sign, u, steps).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_round_trip() {
        let m = ProfileMeta {
            sign: -1,
            lambda: 1.0,
            p: 3.0,
            p_minus: Some(2.5),
            h: 0.05,
            l_xi: 14.45,
            mu: 1.862089,
            mu_fit: 1.86,
            energy: 3.25,
            residual: 1e-11,
        };
        assert_eq!(parse_profile_meta(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn meta_errors() {
        assert!(parse_profile_meta("sign=1\n").is_err());
        assert!(parse_profile_meta("sign=2\n").is_err());
        assert!(parse_profile_meta("lambda\n").is_err());
        assert!(parse_profile_meta("sign=1\nbogus=1\n").is_err());
        assert!(parse_profile_meta("sign=1\nlambda=1\nlambda=2\n").is_err());
    }
}
