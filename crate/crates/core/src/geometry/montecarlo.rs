//! Monte-Carlo volume of a ball with a unit ball removed.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489;
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    /// half width of the 99% confidence interval
    pub half_width: f64,
    pub samples: usize,
}

impl VolumeEstimate {
    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }
}

/// Volume of the unit ball in `dim` dimensions.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Estimates `vol(B_r(x2) \ B_1(x1))` by uniform sampling of `B_r(x2)`.
pub fn ball_difference_volume(x1: &[f64], x2: &[f64], r: f64, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let dim = x1.len();
    if dim == 0 || x2.len() != dim {
        return Err(Error::RangeViolation(format!("centers must share a positive dimension ({} vs {})", dim, x2.len())));
    }
    let d = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if !(d < 1.0) {
        return Err(Error::RangeViolation(format!("|x1 - x2| = {d} must be below 1")));
    }
    if !(r >= 1.0 && r <= d + 1.0) {
        return Err(Error::RangeViolation(format!("radius {r} outside [1, {}]", d + 1.0)));
    }
    if samples < 10_000 {
        return Err(Error::RangeViolation(format!("at least 10^4 samples required, got {samples}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; dim];
    let mut outside = 0usize;
    let mut drawn = 0usize;
    while drawn < samples {
        let mut rr = 0.0;
        for c in y.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
            rr += *c * *c;
        }
        if rr >= 1.0 {
            continue;
        }
        drawn += 1;
        let mut q = 0.0;
        for k in 0..dim {
            let p = x2[k] + r * y[k] - x1[k];
            q += p * p;
        }
        if q >= 1.0 {
            outside += 1;
        }
    }
    let vol = unit_ball_volume(dim) * r.powi(dim as i32);
    let p = outside as f64 / samples as f64;
    Ok(VolumeEstimate {
        value: vol * p,
        half_width: Z_99 * vol * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Closed-form `vol(B_r(x2) \ B_1(x1))` with `d = |x1 - x2|` and `r >= 1`,
/// in 2 or 3 dimensions.
pub fn ball_difference_exact(dim: usize, d: f64, r: f64) -> Option<f64> {
    let (a, b) = (1.0, r);
    let contained = d <= b - a;
    let lens = match dim {
        2 if contained => PI * a * a,
        2 => {
            let ca = ((d * d + a * a - b * b) / (2.0 * d * a)).clamp(-1.0, 1.0);
            let cb = ((d * d + b * b - a * a) / (2.0 * d * b)).clamp(-1.0, 1.0);
            let k = ((-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b)).max(0.0).sqrt();
            a * a * ca.acos() + b * b * cb.acos() - 0.5 * k
        }
        3 if contained => 4.0 / 3.0 * PI * a * a * a,
        3 => PI * (a + b - d).powi(2) * (d * d + 2.0 * d * b - 3.0 * b * b + 2.0 * d * a + 6.0 * a * b - 3.0 * a * a) / (12.0 * d),
        _ => return None,
    };
    Some(unit_ball_volume(dim) * b.powi(dim as i32) - lens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates_bracket_closed_forms() {
        for (dim, d, r, seed) in [(2, 0.5, 1.0, 1), (2, 0.3, 1.2, 2), (3, 0.4, 1.3, 3), (3, 0.9, 1.85, 4)] {
            let mut x2 = vec![0.0; dim];
            x2[0] = d;
            let e = ball_difference_volume(&vec![0.0; dim], &x2, r, 200_000, seed).unwrap();
            let exact = ball_difference_exact(dim, d, r).unwrap();
            assert!(e.lower() <= exact && exact <= e.upper(), "{dim} {d} {r}: {exact} vs {e:?}");
        }
    }

    #[test]
    fn closed_form_limits() {
        assert!(ball_difference_exact(2, 0.0, 1.0).unwrap().abs() < 1e-15);
        // B_1(x1) inside B_2(x2): the difference is an annulus-like region
        let v = ball_difference_exact(3, 0.5, 2.0).unwrap();
        assert!((v - 4.0 / 3.0 * PI * 7.0).abs() < 1e-12);
        // tiny shift of equal disks: area ~ 2 d
        let v = ball_difference_exact(2, 1e-4, 1.0).unwrap();
        assert!((v / 1e-4 - 2.0).abs() < 1e-3, "{}", v / 1e-4);
    }

    #[test]
    fn coincident_unit_balls_have_empty_difference() {
        let v = ball_difference_volume(&[0.0, 0.0], &[0.0, 0.0], 1.0, 20_000, 1).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.half_width, 0.0);
    }

    #[test]
    fn ranges_are_enforced() {
        assert!(ball_difference_volume(&[0.0, 0.0], &[2.0, 0.0], 1.0, 20_000, 1).is_err());
        assert!(ball_difference_volume(&[0.0, 0.0], &[0.5, 0.0], 1.6, 20_000, 1).is_err());
        assert!(ball_difference_volume(&[0.0, 0.0], &[0.5, 0.0], 0.9, 20_000, 1).is_err());
        assert!(ball_difference_volume(&[0.0, 0.0], &[0.5, 0.0], 1.2, 100, 1).is_err());
    }

    #[test]
    fn same_seed_same_estimate() {
        let a = ball_difference_volume(&[0.0, 0.0, 0.0], &[0.2, 0.1, 0.0], 1.1, 20_000, 7).unwrap();
        let b = ball_difference_volume(&[0.0, 0.0, 0.0], &[0.2, 0.1, 0.0], 1.1, 20_000, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * PI).abs() < 1e-14);
    }
}
