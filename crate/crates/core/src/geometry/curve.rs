//! Planar C² curves and their arc-length parametrization.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub type Point = [f64; 2];

/// Number of intervals in the arc-length table.
pub const DEFAULT_ARC_RESOLUTION: usize = 4096;
/// Minimal parameter separation used by the self-intersection check.
pub const DEFAULT_SELF_INTERSECTION_DELTA: f64 = 0.05;
/// Step (in t) of the finite differences used for spline derivatives.
const SPLINE_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Circle { center: Point, radius: f64 },
    Segment { start: Point, end: Point },
    /// Cubic spline through the knots at uniformly spaced parameters. A closed
    /// spline repeats its first knot as its last one and is periodic.
    Spline { knots: Vec<Point> },
}

/// Raw description of a curve, as read from a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSource {
    pub kind: CurveKind,
    pub closed: bool,
}

impl CurveSource {
    pub fn circle(center: Point, radius: f64) -> Self {
        CurveSource { kind: CurveKind::Circle { center, radius }, closed: true }
    }

    pub fn segment(start: Point, end: Point) -> Self {
        CurveSource { kind: CurveKind::Segment { start, end }, closed: false }
    }

    pub fn spline(knots: Vec<Point>, closed: bool) -> Self {
        CurveSource { kind: CurveKind::Spline { knots }, closed }
    }
}

#[derive(Debug, Clone)]
struct SplineData {
    knots: Vec<Point>,
    /// Second derivatives with respect to t at the knots.
    second: Vec<Point>,
    closed: bool,
}

impl SplineData {
    fn new(knots: Vec<Point>, closed: bool) -> Result<Self> {
        let m = knots.len();
        if m < 3 {
            return Err(Error::CurveData(format!("spline needs at least 3 knots, got {m}")));
        }
        for w in knots.windows(2) {
            if dist(w[0], w[1]) < 1e-12 {
                return Err(Error::CurveData("consecutive spline knots coincide".into()));
            }
        }
        let segments = m - 1;
        let dt = 1.0 / segments as f64;
        let mut second = vec![[0.0; 2]; m];
        if closed {
            if dist(knots[0], knots[m - 1]) > 1e-12 {
                return Err(Error::ClosureMismatch { gap: dist(knots[0], knots[m - 1]) });
            }
            // periodic: unknowns are M_0..M_{segments-1}
            let n = segments;
            if n < 3 {
                return Err(Error::CurveData("closed spline needs at least 3 distinct knots".into()));
            }
            let mut a = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                a[(i, (i + n - 1) % n)] += 1.0;
                a[(i, i)] += 4.0;
                a[(i, (i + 1) % n)] += 1.0;
            }
            let lu = a.lu();
            for c in 0..2 {
                let rhs = DVector::from_fn(n, |i, _| {
                    let prev = knots[(i + n - 1) % n][c];
                    let next = knots[(i + 1) % n][c];
                    6.0 * (prev - 2.0 * knots[i][c] + next) / (dt * dt)
                });
                let sol = lu.solve(&rhs).ok_or_else(|| Error::CurveData("singular spline system".into()))?;
                for i in 0..n {
                    second[i][c] = sol[i];
                }
                second[m - 1][c] = sol[0];
            }
        } else {
            // natural: M_0 = M_{m-1} = 0
            let n = m - 2;
            let mut a = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                a[(i, i)] = 4.0;
                if i > 0 {
                    a[(i, i - 1)] = 1.0;
                }
                if i + 1 < n {
                    a[(i, i + 1)] = 1.0;
                }
            }
            let lu = a.lu();
            for c in 0..2 {
                let rhs = DVector::from_fn(n, |i, _| {
                    6.0 * (knots[i][c] - 2.0 * knots[i + 1][c] + knots[i + 2][c]) / (dt * dt)
                });
                let sol = lu.solve(&rhs).ok_or_else(|| Error::CurveData("singular spline system".into()))?;
                for i in 0..n {
                    second[i + 1][c] = sol[i];
                }
            }
        }
        Ok(SplineData { knots, second, closed })
    }

    fn eval(&self, t: f64) -> Point {
        let segments = self.knots.len() - 1;
        let dt = 1.0 / segments as f64;
        let t = if self.closed { t.rem_euclid(1.0) } else { t };
        // open splines extrapolate with the end cubic
        let k = ((t / dt).floor() as isize).clamp(0, segments as isize - 1) as usize;
        let a = (t - k as f64 * dt) / dt;
        let b = 1.0 - a;
        let mut out = [0.0; 2];
        for c in 0..2 {
            let y0 = self.knots[k][c];
            let y1 = self.knots[k + 1][c];
            let m0 = self.second[k][c];
            let m1 = self.second[k + 1][c];
            out[c] = b * y0 + a * y1 + ((b * b * b - b) * m0 + (a * a * a - a) * m1) * dt * dt / 6.0;
        }
        out
    }
}

/// A validated planar curve `gamma: [0,1] -> R^2` with an arc-length table.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    source: CurveSource,
    spline: Option<SplineData>,
    /// cumulative arc length at t = i / resolution
    arc_table: Vec<f64>,
    length: f64,
    kappa_max: f64,
}

/// Builds a curve from its source description and checks the immersion,
/// closure and embedding conditions.
pub fn make_curve(source: &CurveSource) -> Result<CurveSpec> {
    make_curve_with(source, DEFAULT_ARC_RESOLUTION, DEFAULT_SELF_INTERSECTION_DELTA)
}

pub fn make_curve_with(source: &CurveSource, resolution: usize, delta: f64) -> Result<CurveSpec> {
    if resolution < 16 {
        return Err(Error::CurveData(format!("arc-length resolution {resolution} too small")));
    }
    let spline = match &source.kind {
        CurveKind::Circle { center, radius } => {
            if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                return Err(Error::CurveData(format!("circle radius must be positive, got {radius}")));
            }
            if !source.closed {
                return Err(Error::CurveData("a circle is a closed curve".into()));
            }
            None
        }
        CurveKind::Segment { start, end } => {
            if !start.iter().chain(end.iter()).all(|c| c.is_finite()) {
                return Err(Error::CurveData("segment endpoints must be finite".into()));
            }
            if source.closed {
                return Err(Error::ClosureMismatch { gap: dist(*start, *end) });
            }
            None
        }
        CurveKind::Spline { knots } => {
            if !knots.iter().flatten().all(|c| c.is_finite()) {
                return Err(Error::CurveData("spline knots must be finite".into()));
            }
            Some(SplineData::new(knots.clone(), source.closed)?)
        }
    };
    let mut curve = CurveSpec {
        source: source.clone(),
        spline,
        arc_table: Vec::new(),
        length: 0.0,
        kappa_max: 0.0,
    };

    // immersion
    let samples = resolution.max(1024);
    let mut speed_scale: f64 = 0.0;
    for i in 0..=samples {
        speed_scale = speed_scale.max(norm(curve.d1(i as f64 / samples as f64)));
    }
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let speed = norm(curve.d1(t));
        if !(speed > 1e-8 * speed_scale.max(1e-300)) {
            return Err(Error::DegenerateTangent { t, speed });
        }
    }

    // closure
    if source.closed {
        let gap = dist(curve.point(0.0), curve.point(1.0));
        let tgap = dist(curve.d1(0.0), curve.d1(1.0));
        if gap > 1e-9 * (1.0 + speed_scale) || tgap > 1e-6 * speed_scale {
            return Err(Error::ClosureMismatch { gap: gap.max(tgap) });
        }
    }

    // arc-length table by 5-point Gauss-Legendre per interval
    let (nodes, weights) = gauss_legendre_5();
    let mut table = Vec::with_capacity(resolution + 1);
    table.push(0.0);
    let dt = 1.0 / resolution as f64;
    let mut acc = 0.0;
    for i in 0..resolution {
        let a = i as f64 * dt;
        let mut seg = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            seg += w * norm(curve.d1(a + 0.5 * dt * (1.0 + x)));
        }
        acc += 0.5 * dt * seg;
        table.push(acc);
    }
    curve.length = acc;
    curve.arc_table = table;

    // embedding
    let probe = 1024;
    let pts: Vec<Point> = (0..probe).map(|i| curve.point(i as f64 / probe as f64)).collect();
    let floor = 1e-9 * curve.length;
    for i in 0..probe {
        for j in (i + 1)..probe {
            let ti = i as f64 / probe as f64;
            let tj = j as f64 / probe as f64;
            let mut sep = (tj - ti).abs();
            if source.closed {
                sep = sep.min(1.0 - sep);
            }
            if sep > delta {
                let d = dist(pts[i], pts[j]);
                if d <= floor {
                    return Err(Error::SelfIntersection { t1: ti, t2: tj, distance: d });
                }
            }
        }
    }

    let mut kmax: f64 = 0.0;
    for i in 0..=resolution {
        kmax = kmax.max(curve.curvature(i as f64 / resolution as f64).abs());
    }
    curve.kappa_max = kmax;
    Ok(curve)
}

impl CurveSpec {
    pub fn source(&self) -> &CurveSource {
        &self.source
    }

    pub fn closed(&self) -> bool {
        self.source.closed
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    /// True when the curvature is constant along the curve (circle, segment).
    pub fn uniform_curvature(&self) -> bool {
        !matches!(self.source.kind, CurveKind::Spline { .. })
    }

    pub fn point(&self, t: f64) -> Point {
        match &self.source.kind {
            CurveKind::Circle { center, radius } => {
                let a = 2.0 * std::f64::consts::PI * t;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            CurveKind::Segment { start, end } => {
                [start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])]
            }
            CurveKind::Spline { .. } => self.spline.as_ref().expect("spline data").eval(t),
        }
    }

    pub fn d1(&self, t: f64) -> Point {
        match &self.source.kind {
            CurveKind::Circle { radius, .. } => {
                let w = 2.0 * std::f64::consts::PI;
                let a = w * t;
                [-radius * w * a.sin(), radius * w * a.cos()]
            }
            CurveKind::Segment { start, end } => [end[0] - start[0], end[1] - start[1]],
            CurveKind::Spline { .. } => {
                let h = SPLINE_FD_STEP;
                let p = self.point(t + h);
                let m = self.point(t - h);
                [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)]
            }
        }
    }

    pub fn d2(&self, t: f64) -> Point {
        match &self.source.kind {
            CurveKind::Circle { radius, .. } => {
                let w = 2.0 * std::f64::consts::PI;
                let a = w * t;
                [-radius * w * w * a.cos(), -radius * w * w * a.sin()]
            }
            CurveKind::Segment { .. } => [0.0, 0.0],
            CurveKind::Spline { .. } => {
                let h = SPLINE_FD_STEP;
                let p = self.point(t + h);
                let c = self.point(t);
                let m = self.point(t - h);
                [(p[0] - 2.0 * c[0] + m[0]) / (h * h), (p[1] - 2.0 * c[1] + m[1]) / (h * h)]
            }
        }
    }

    /// Signed curvature; positive when the curve turns towards its left normal.
    pub fn curvature(&self, t: f64) -> f64 {
        match &self.source.kind {
            CurveKind::Circle { radius, .. } => 1.0 / radius,
            CurveKind::Segment { .. } => 0.0,
            CurveKind::Spline { .. } => {
                let a = self.d1(t);
                let b = self.d2(t);
                (a[0] * b[1] - a[1] * b[0]) / norm(a).powi(3)
            }
        }
    }

    pub fn unit_tangent(&self, t: f64) -> Point {
        let d = self.d1(t);
        let n = norm(d);
        [d[0] / n, d[1] / n]
    }

    /// Left unit normal (tangent rotated by +90 degrees).
    pub fn unit_normal(&self, t: f64) -> Point {
        let tau = self.unit_tangent(t);
        [-tau[1], tau[0]]
    }

    /// Arc length from t = 0 to t.
    pub fn arc_of_t(&self, t: f64) -> f64 {
        match &self.source.kind {
            CurveKind::Circle { .. } | CurveKind::Segment { .. } => t * self.length,
            CurveKind::Spline { .. } => {
                let res = self.arc_table.len() - 1;
                let tc = t.clamp(0.0, 1.0);
                let i = ((tc * res as f64).floor() as usize).min(res - 1);
                let a = i as f64 / res as f64;
                // short Gauss rule on the partial interval
                let (nodes, weights) = gauss_legendre_5();
                let half = 0.5 * (tc - a);
                let mut seg = 0.0;
                for (x, w) in nodes.iter().zip(weights.iter()) {
                    seg += w * norm(self.d1(a + half * (1.0 + x)));
                }
                self.arc_table[i] + half * seg
            }
        }
    }

    /// Inverse of [`arc_of_t`](Self::arc_of_t) for arc lengths in `[0, length]`.
    pub fn t_of_arc(&self, sigma: f64) -> f64 {
        match &self.source.kind {
            CurveKind::Circle { .. } | CurveKind::Segment { .. } => sigma / self.length,
            CurveKind::Spline { .. } => {
                let sigma = sigma.clamp(0.0, self.length);
                let res = self.arc_table.len() - 1;
                let i = match self.arc_table.binary_search_by(|v| v.partial_cmp(&sigma).unwrap()) {
                    Ok(i) => i.min(res - 1),
                    Err(i) => i.saturating_sub(1).min(res - 1),
                };
                let (s0, s1) = (self.arc_table[i], self.arc_table[i + 1]);
                let mut t = (i as f64 + (sigma - s0) / (s1 - s0)) / res as f64;
                for _ in 0..4 {
                    let f = self.arc_of_t(t) - sigma;
                    t -= f / norm(self.d1(t));
                }
                t
            }
        }
    }
}

pub(crate) fn gauss_legendre_5() -> ([f64; 5], [f64; 5]) {
    let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
    ([-b, -a, 0.0, a, b], [wb, wa, 128.0 / 225.0, wa, wb])
}

pub fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_circle_has_unit_curvature_and_length_two_pi() {
        let c = make_curve(&CurveSource::circle([0.0, 0.0], 1.0)).unwrap();
        assert!((c.length() - 2.0 * PI).abs() < 1e-12);
        assert!((c.kappa_max() - 1.0).abs() < 1e-14);
        for i in 0..10 {
            assert!((c.curvature(i as f64 / 10.0) - 1.0).abs() < 1e-14);
        }
        assert!(c.closed());
    }

    #[test]
    fn segment_is_straight_and_open() {
        let c = make_curve(&CurveSource::segment([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!(c.kappa_max(), 0.0);
        assert!(!c.closed());
        assert!((c.length() - 1.0).abs() < 1e-14);
        assert_eq!(c.unit_normal(0.3), [-0.0, 1.0]);
    }

    #[test]
    fn closed_segment_is_a_closure_mismatch() {
        let mut src = CurveSource::segment([0.0, 0.0], [1.0, 0.0]);
        src.closed = true;
        assert!(matches!(make_curve(&src), Err(Error::ClosureMismatch { .. })));
    }

    #[test]
    fn closed_spline_needs_matching_ends() {
        let src = CurveSource::spline(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], true);
        assert!(matches!(make_curve(&src), Err(Error::ClosureMismatch { .. })));
    }

    #[test]
    fn figure_eight_spline_self_intersects() {
        let knots = vec![
            [0.0, 0.0],
            [1.0, 1.0],
            [2.0, 0.0],
            [1.0, -1.0],
            [0.0, 0.0],
            [-1.0, 1.0],
            [-2.0, 0.0],
            [-1.0, -1.0],
            [0.0, 0.0],
        ];
        let src = CurveSource::spline(knots, true);
        assert!(matches!(make_curve(&src), Err(Error::SelfIntersection { .. })));
    }

    #[test]
    fn repeated_knot_is_rejected() {
        let src = CurveSource::spline(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], false);
        assert!(matches!(make_curve(&src), Err(Error::CurveData(_))));
    }

    #[test]
    fn degenerate_segment_has_no_tangent() {
        let src = CurveSource::segment([1.0, 1.0], [1.0, 1.0]);
        assert!(matches!(make_curve(&src), Err(Error::DegenerateTangent { .. })));
    }

    #[test]
    fn arc_length_inverse_round_trips_on_spline() {
        let c = make_curve(&CurveSource::spline(vec![[0.0, 0.0], [1.0, 0.2], [2.0, 0.0]], false)).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let s = c.arc_of_t(t);
            assert!((c.t_of_arc(s) - t).abs() < 1e-10, "t = {t}");
        }
        // chord is a lower bound for the length
        assert!(c.length() > 2.0 && c.length() < 2.1);
    }

    #[test]
    fn periodic_spline_is_closed_and_smooth() {
        let n = 12;
        let knots: Vec<Point> = (0..=n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                [a.cos(), 0.7 * a.sin()]
            })
            .collect();
        let c = make_curve(&CurveSource::spline(knots, true)).unwrap();
        assert!(dist(c.d1(0.0), c.d1(1.0)) < 1e-6);
        assert!(c.kappa_max() > 1.0);
    }
}
