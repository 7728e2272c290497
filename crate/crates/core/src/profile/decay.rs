//! Exponential decay rate of a profile along its axis.

use super::ground_state::BumpProfile;
use crate::error::{Error, Result};

pub const DEFAULT_FIT_WINDOW: (f64, f64) = (4.0, 8.0);
/// Values below this are treated as numerical noise.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub mu_fit: f64,
    pub mu: f64,
    pub relative_error: f64,
    /// fitted `log |U(0, 0)|`-scale intercept, `C` in `C e^{-mu xi}`
    pub amplitude: f64,
    pub points: usize,
    /// largest deviation of the samples from the fitted line, in log units
    pub max_log_deviation: f64,
}

/// Least-squares slope of `log |U(xi, 0)|` for `xi` in the window.
pub fn decay_rate(profile: &BumpProfile, window: (f64, f64)) -> Result<DecayFit> {
    let g = profile.grid();
    let (a, b) = window;
    let half = profile.half_length();
    if !(a > 0.0 && b > a && b < half - 2.0 + 1e-12) {
        return Err(Error::RangeViolation(format!("fit window [{a}, {b}] must lie in (0, {})", half - 2.0)));
    }
    let row = profile.center_row();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in 0..g.ncols() {
        let xi = g.s(c);
        if xi >= a - 1e-9 && xi <= b + 1e-9 {
            let v = profile.field().at(c, row).abs();
            if !(v > NOISE_FLOOR) {
                return Err(Error::WindowUnderflow(format!("|U({xi:.3}, 0)| = {v:.3e}")));
            }
            xs.push(xi);
            ys.push(v.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::RangeViolation("fit window holds fewer than two nodes".into()));
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    let max_log_deviation = xs
        .iter()
        .zip(&ys)
        .fold(0.0f64, |m, (x, y)| m.max((y - (intercept + slope * x)).abs()));
    let mu = profile.mu();
    Ok(DecayFit {
        mu_fit: -slope,
        mu,
        relative_error: (-slope - mu).abs() / mu,
        amplitude: intercept.exp(),
        points: xs.len(),
        max_log_deviation,
    })
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (s, c) = linear_fit(&xs, &ys);
        assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-14);
    }
}
