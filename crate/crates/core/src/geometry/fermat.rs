//! Fermat point of a planar triangle.

use super::curve::{dist, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermatPoint {
    pub point: Point,
    /// minimal total distance to the three vertices
    pub total: f64,
}

fn total_distance(x: Point, v: &[Point; 3]) -> f64 {
    v.iter().map(|p| dist(x, *p)).sum()
}

/// Minimizer of `|x - x1| + |x - x2| + |x - x3|`.
///
/// A vertex whose interior angle is at least 120 degrees (or which coincides
/// with another vertex) is the minimizer. Otherwise the point is interior and
/// is located by Weiszfeld iteration followed by Newton polishing.
pub fn fermat_point(x1: Point, x2: Point, x3: Point) -> FermatPoint {
    let v = [x1, x2, x3];
    for k in 0..3 {
        let a = v[k];
        let b = v[(k + 1) % 3];
        let c = v[(k + 2) % 3];
        let (db, dc) = (dist(a, b), dist(a, c));
        if db == 0.0 || dc == 0.0 {
            return FermatPoint { point: a, total: total_distance(a, &v) };
        }
        let cos = ((b[0] - a[0]) * (c[0] - a[0]) + (b[1] - a[1]) * (c[1] - a[1])) / (db * dc);
        if cos <= -0.5 {
            return FermatPoint { point: a, total: db + dc };
        }
    }

    let scale = dist(x1, x2).max(dist(x2, x3)).max(dist(x1, x3));
    let mut x = [(x1[0] + x2[0] + x3[0]) / 3.0, (x1[1] + x2[1] + x3[1]) / 3.0];
    for _ in 0..10_000 {
        let (mut nx, mut ny, mut den) = (0.0, 0.0, 0.0);
        for p in &v {
            let d = dist(x, *p).max(1e-300);
            nx += p[0] / d;
            ny += p[1] / d;
            den += 1.0 / d;
        }
        let next = [nx / den, ny / den];
        let step = dist(next, x);
        x = next;
        if step <= 1e-10 * scale {
            break;
        }
    }

    // Newton on the gradient of the distance sum; guarded by monotonicity
    for _ in 0..8 {
        let (mut gx, mut gy) = (0.0, 0.0);
        let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
        for p in &v {
            let dx = x[0] - p[0];
            let dy = x[1] - p[1];
            let d = dx.hypot(dy);
            if d < 1e-14 * scale {
                return FermatPoint { point: x, total: total_distance(x, &v) };
            }
            gx += dx / d;
            gy += dy / d;
            let d3 = d * d * d;
            hxx += dy * dy / d3;
            hxy -= dx * dy / d3;
            hyy += dx * dx / d3;
        }
        let det = hxx * hyy - hxy * hxy;
        if !(det > 0.0) {
            break;
        }
        let cand = [x[0] - (hyy * gx - hxy * gy) / det, x[1] - (hxx * gy - hxy * gx) / det];
        if total_distance(cand, &v) <= total_distance(x, &v) {
            x = cand;
        } else {
            break;
        }
    }
    FermatPoint { point: x, total: total_distance(x, &v) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_unit_triangle() {
        let f = fermat_point([0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]);
        assert!((f.total - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_use_middle_vertex() {
        let f = fermat_point([0.0, 0.0], [1.0, 0.0], [2.0, 0.0]);
        assert_eq!(f.point, [1.0, 0.0]);
        assert!((f.total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn obtuse_vertex_at_120_degrees() {
        let f = fermat_point([0.0, 0.0], [1.0, 0.0], [-0.5, 0.866025]);
        let expected = 1.0 + (0.25f64 + 0.866025 * 0.866025).sqrt();
        assert!((f.total - expected).abs() < 1e-12);
        assert!((f.total - 2.0).abs() < 1e-6);
    }

    #[test]
    fn coincident_vertices() {
        let f = fermat_point([1.0, 1.0], [1.0, 1.0], [4.0, 5.0]);
        assert!((f.total - 5.0).abs() < 1e-15);
        let f = fermat_point([2.0, 2.0], [2.0, 2.0], [2.0, 2.0]);
        assert_eq!(f.total, 0.0);
    }
}
