//! Ordered chains of points on an expanded curve and their admissibility.

use super::curve::{dist, CurveSpec, Point};
use crate::error::{Error, Result};

/// Points `x_i = R gamma(t_i)` with alternating signs, starting with `+`.
#[derive(Debug, Clone)]
pub struct Chain {
    params: Vec<f64>,
    r: f64,
    closed: bool,
    signs: Vec<i8>,
    points: Vec<Point>,
    /// arc-length position of each point along the expanded curve
    arcs: Vec<f64>,
    distances: Vec<Vec<f64>>,
    boundary: Option<Vec<f64>>,
}

pub fn chain_from_params(curve: &CurveSpec, r: f64, t: &[f64]) -> Result<Chain> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::RangeViolation(format!("expansion factor R must be positive, got {r}")));
    }
    let n = t.len();
    if t.iter().any(|v| !v.is_finite() || *v < 0.0 || *v >= 1.0) {
        return Err(Error::OrderViolation(format!("parameters {t:?} leave [0,1)")));
    }
    let descents = (1..n).filter(|&i| t[i] <= t[i - 1]).count();
    let ordered = if curve.closed() && n > 1 {
        // a circular shift of an increasing list has at most one descent,
        // and then the wrap-around pair must also increase
        descents == 0 || (descents == 1 && t[n - 1] < t[0] && (1..n).all(|i| t[i] != t[i - 1]))
    } else {
        descents == 0
    };
    if !ordered {
        return Err(Error::OrderViolation(format!("parameters {t:?} are not strictly increasing")));
    }
    if curve.closed() && n % 2 == 1 {
        return Err(Error::OddChainOnClosedCurve(n));
    }

    let signs = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    let points: Vec<Point> = t
        .iter()
        .map(|&ti| {
            let p = curve.point(ti);
            [r * p[0], r * p[1]]
        })
        .collect();
    let arcs = t.iter().map(|&ti| r * curve.arc_of_t(ti)).collect();
    let distances = points.iter().map(|a| points.iter().map(|b| dist(*a, *b)).collect()).collect();
    let boundary = if curve.closed() {
        None
    } else {
        let e0 = curve.point(0.0);
        let e1 = curve.point(1.0);
        let e0 = [r * e0[0], r * e0[1]];
        let e1 = [r * e1[0], r * e1[1]];
        Some(points.iter().map(|p| dist(*p, e0).min(dist(*p, e1))).collect())
    };
    Ok(Chain { params: t.to_vec(), r, closed: curve.closed(), signs, points, arcs, distances, boundary })
}

impl Chain {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn arc_positions(&self) -> &[f64] {
        &self.arcs
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    /// Distances to the end points of the expanded curve (open curves only).
    pub fn boundary_distances(&self) -> Option<&[f64]> {
        self.boundary.as_deref()
    }

    /// Number of +/- pairs, `k = floor(n / 2)`.
    pub fn pairs(&self) -> usize {
        self.len() / 2
    }

    /// Index distance along the chain, wrapping around on closed curves.
    pub fn index_distance(&self, i: usize, j: usize) -> usize {
        index_distance(self.len(), i, j, self.closed)
    }

    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                m = m.min(self.distances[i][j]);
            }
        }
        m
    }
}

pub fn index_distance(n: usize, i: usize, j: usize, wrap: bool) -> usize {
    let d = i.abs_diff(j);
    if wrap {
        d.min(n - d)
    } else {
        d
    }
}

/// Logarithmic separation scales `g1 = log R / (2 mu)` and
/// `g2 = (1/2 + 1/(4 alpha')) g1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationScales {
    pub mu: f64,
    pub alpha_prime: f64,
    pub r: f64,
    pub g1: f64,
    pub g2: f64,
}

impl SeparationScales {
    pub fn new(mu: f64, alpha_prime: f64, r: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::RangeViolation(format!("decay rate must be positive, got {mu}")));
        }
        if !(alpha_prime > 0.5 && alpha_prime <= 1.0) {
            return Err(Error::RangeViolation(format!("alpha' must lie in (1/2, 1], got {alpha_prime}")));
        }
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::RangeViolation(format!("R must exceed 1, got {r}")));
        }
        let g1 = r.ln() / (2.0 * mu);
        let g2 = (0.5 + 1.0 / (4.0 * alpha_prime)) * g1;
        Ok(SeparationScales { mu, alpha_prime, r, g1, g2 })
    }

    pub fn g(&self, m: u8) -> f64 {
        if m == 1 {
            self.g1
        } else {
            self.g2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// smallest pairwise distance
    pub min_separation: f64,
    /// smallest `2 dist(x_i, ends)` (infinite for closed curves)
    pub min_boundary: f64,
    /// smallest margin over all constraints; negative when violated
    pub slack: f64,
}

pub fn chain_admissible(chain: &Chain, scales: &SeparationScales, m: u8, open: bool) -> AdmissibilityReport {
    let g = scales.g(m);
    let min_separation = chain.min_separation();
    let min_boundary = match (open, chain.boundary_distances()) {
        (true, Some(b)) => b.iter().fold(f64::INFINITY, |acc, v| acc.min(2.0 * v)),
        _ => f64::INFINITY,
    };
    let slack = (min_separation - g).min(min_boundary - g);
    AdmissibilityReport { admissible: slack > 0.0, min_separation, min_boundary, slack }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curve::{make_curve, CurveSource};

    fn circle() -> CurveSpec {
        make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap()
    }

    fn segment() -> CurveSpec {
        make_curve(&CurveSource::segment([0.0, 0.0], [1.0, 0.0])).unwrap()
    }

    #[test]
    fn antipodal_pair_on_circle() {
        let c = chain_from_params(&circle(), 10.0, &[0.0, 0.5]).unwrap();
        assert!((c.points()[0][0] - 10.0).abs() < 1e-12);
        assert!((c.points()[1][0] + 10.0).abs() < 1e-12);
        assert!((c.distance(0, 1) - 20.0).abs() < 1e-12);
        assert_eq!(c.signs(), &[1, -1]);
    }

    #[test]
    fn segment_boundary_distances() {
        let c = chain_from_params(&segment(), 10.0, &[0.25, 0.75]).unwrap();
        let b = c.boundary_distances().unwrap();
        assert!((b[0] - 2.5).abs() < 1e-12 && (b[1] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn wrap_adjacency() {
        let t: Vec<f64> = (0..6).map(|i| i as f64 / 6.0).collect();
        let c = chain_from_params(&circle(), 10.0, &t).unwrap();
        assert_eq!(c.index_distance(0, 5), 1);
        assert_eq!(c.index_distance(5, 0), 1);
        assert_eq!(c.index_distance(0, 3), 3);
    }

    #[test]
    fn odd_chain_on_closed_curve_is_rejected() {
        let err = chain_from_params(&circle(), 10.0, &[0.0, 0.3, 0.6]).unwrap_err();
        assert_eq!(err, Error::OddChainOnClosedCurve(3));
    }

    #[test]
    fn open_chain_of_three_ends_positive() {
        let c = chain_from_params(&segment(), 40.0, &[0.2, 0.5, 0.8]).unwrap();
        assert_eq!(c.signs(), &[1, -1, 1]);
        assert_eq!(c.pairs(), 1);
    }

    #[test]
    fn ordering_rules() {
        assert!(matches!(chain_from_params(&segment(), 10.0, &[0.5, 0.4]), Err(Error::OrderViolation(_))));
        assert!(matches!(chain_from_params(&segment(), 10.0, &[0.5, 1.0]), Err(Error::OrderViolation(_))));
        // circular shifts are chains on closed curves
        assert!(chain_from_params(&circle(), 10.0, &[0.75, 0.25]).is_ok());
        assert!(matches!(
            chain_from_params(&circle(), 10.0, &[0.75, 0.1, 0.2, 0.8]),
            Err(Error::OrderViolation(_))
        ));
    }

    #[test]
    fn scales_follow_log_formula() {
        let s = SeparationScales::new(1.862089, 0.75, 100.0).unwrap();
        assert!((s.g1 - 1.236560).abs() < 1e-6);
        assert!(s.g2 < s.g1);
    }

    #[test]
    fn admissibility_examples() {
        let s = SeparationScales::new(1.862089, 0.75, 100.0).unwrap();
        let c = chain_from_params(&circle(), 100.0, &[0.0, 0.5]).unwrap();
        assert!(chain_admissible(&c, &s, 1, false).admissible);

        let c = chain_from_params(&segment(), 100.0, &[0.001, 0.999]).unwrap();
        let rep = chain_admissible(&c, &s, 1, true);
        assert!(!rep.admissible);
        assert!((rep.min_boundary - 0.2).abs() < 1e-9);
    }

    #[test]
    fn coincident_points_have_zero_separation() {
        // a closed chain through the same point twice, via wrap-around parameters
        let c = chain_from_params(&circle(), 10.0, &[0.0, 0.999_999_999_999]).unwrap();
        let s = SeparationScales::new(1.862089, 0.75, 10.0).unwrap();
        let rep = chain_admissible(&c, &s, 1, false);
        assert!(!rep.admissible);
        assert!(rep.min_separation < 1e-9);
    }
}
