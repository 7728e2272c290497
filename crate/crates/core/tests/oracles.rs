//! Independent reference computations checked against the library.

use multibump::geometry::{ball_difference_exact, ball_difference_volume, fermat_point};
use multibump::pde::operator::a_inner;
use multibump::pde::{build_strip_grid, smallest_eigenpairs, GridField, ShiftedOperator};
use multibump::profile::decay::linear_fit;
use multibump::profile::ground_state::default_strip_half_length;
use multibump::profile::{decay_rate, decay_rate_exact, solve_ground_state, NonlinearitySpec};
use std::f64::consts::PI;

#[test]
fn strip_spectrum_matches_discrete_sine_modes() {
    let (l, h) = (2.0, 0.1);
    let grid = build_strip_grid(l, h).unwrap();
    let nx = (2.0 * l / h).round() as usize;
    let ny = (2.0 / h).round() as usize;
    let mut exact = Vec::new();
    for k in 1..nx {
        for j in 1..ny {
            let a = (k as f64 * PI / (2.0 * nx as f64)).sin();
            let b = (j as f64 * PI / (2.0 * ny as f64)).sin();
            exact.push(4.0 / (h * h) * (a * a + b * b));
        }
    }
    exact.sort_by(f64::total_cmp);
    let pairs = smallest_eigenpairs(&grid, None, 5).unwrap();
    for (p, e) in pairs.iter().zip(&exact) {
        assert!((p.value - e).abs() < 1e-8 * e, "{} vs {e}", p.value);
    }
}

fn petviashvili(lambda: f64, l: f64, h: f64) -> GridField {
    let grid = build_strip_grid(l, h).unwrap();
    let op = ShiftedOperator::helmholtz(grid.clone(), lambda).unwrap();
    let mut u = GridField::from_fn(grid.clone(), |xi, eta| 3.0 * (0.5 * PI * eta).cos() / xi.cosh());
    let m = grid.mass();
    for _ in 0..500 {
        let cube = u.map(|v| v * v * v);
        let num = a_inner(&grid, lambda, u.values(), u.values());
        let den: f64 = u.values().iter().zip(cube.values()).zip(m).map(|((a, b), w)| a * b * w).sum();
        let w = op.solve(&cube).unwrap();
        let next = w.scaled((num / den).powf(1.5));
        let change = next.axpy(-1.0, &u).max_abs();
        u = next;
        if change < 1e-13 * u.max_abs() {
            break;
        }
    }
    u
}

#[test]
fn newton_profile_agrees_with_petviashvili_iteration() {
    let (lambda, l, h) = (1.0, 10.0, 0.1);
    let grid = build_strip_grid(l, h).unwrap();
    let prof = solve_ground_state(&NonlinearitySpec::cubic(), lambda, 1, &grid).unwrap();
    let reference = petviashvili(lambda, l, h);
    let diff = prof.field().axpy(-1.0, &reference).max_abs();
    assert!(diff < 1e-8 * prof.peak(), "max difference {diff:e}");

    let neg = solve_ground_state(&NonlinearitySpec::cubic(), lambda, -1, &grid).unwrap();
    assert!(neg.field().axpy(1.0, &reference).max_abs() < 1e-8 * prof.peak());
}

#[test]
fn ground_state_satisfies_nehari_identity() {
    let lambda = 1.0;
    let h = 0.1;
    let grid = build_strip_grid(default_strip_half_length(decay_rate_exact(lambda), h), h).unwrap();
    let prof = solve_ground_state(&NonlinearitySpec::cubic(), lambda, 1, &grid).unwrap();
    let u = prof.field().values();
    let quad: f64 = u.iter().zip(grid.mass()).map(|(v, w)| v.powi(4) * w).sum();
    let a = a_inner(&grid, lambda, u, u);
    assert!((a - quad).abs() < 1e-8 * quad, "a(U,U) = {a}, int U^4 = {quad}");
    assert!((prof.energy() - 0.25 * quad).abs() < 1e-8 * quad);
}

#[test]
fn decay_fit_error_is_second_order_in_h() {
    let lambda = 1.0;
    let mu = decay_rate_exact(lambda);
    assert!((mu - 1.862096).abs() < 5e-7);
    let errs: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&h| {
            let grid = build_strip_grid(default_strip_half_length(mu, h), h).unwrap();
            let prof = solve_ground_state(&NonlinearitySpec::cubic(), lambda, 1, &grid).unwrap();
            decay_rate(&prof, (4.0, 8.0)).unwrap().relative_error
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!((3.0..5.0).contains(&ratio), "errors {errs:?}");
}

#[test]
fn lens_area_matches_pixel_count() {
    for (d, r) in [(0.3, 1.0), (0.6, 1.4), (0.9, 1.9), (0.2, 1.15)] {
        let n = 1500;
        let (lo, hi) = (-r + d, r + d);
        let step = (hi - lo) / n as f64;
        let mut count = 0usize;
        for i in 0..n {
            let x = lo + (i as f64 + 0.5) * step;
            for j in 0..n {
                let y = -r + (j as f64 + 0.5) * (2.0 * r / n as f64);
                let in_r = (x - d).powi(2) + y * y < r * r;
                let in_1 = x * x + y * y < 1.0;
                if in_r && !in_1 {
                    count += 1;
                }
            }
        }
        let area = count as f64 * step * (2.0 * r / n as f64);
        let exact = ball_difference_exact(2, d, r).unwrap();
        assert!((area - exact).abs() < 3e-3 * exact.max(0.1), "d={d} r={r}: {area} vs {exact}");
    }
}

#[test]
fn lens_volume_matches_slice_integration() {
    // centers on one axis: every slice is a pair of concentric disks
    for (d, r) in [(0.3, 1.0), (0.5, 1.2), (0.9, 1.9), (0.1, 1.1)] {
        let n = 200_000;
        let (lo, hi) = (d - r, d + r);
        let dx = (hi - lo) / n as f64;
        let mut vol = 0.0;
        for i in 0..n {
            let x = lo + (i as f64 + 0.5) * dx;
            let rho2 = (r * r - (x - d) * (x - d)).max(0.0);
            let rho1 = (1.0 - x * x).max(0.0).min(rho2);
            vol += PI * (rho2 - rho1) * dx;
        }
        let exact = ball_difference_exact(3, d, r).unwrap();
        assert!((vol - exact).abs() < 1e-6 * exact.max(1.0), "d={d} r={r}: {vol} vs {exact}");
    }
}

#[test]
fn monte_carlo_interval_covers_lens_volume() {
    let est = ball_difference_volume(&[0.0, 0.0, 0.0], &[0.0, 0.5, 0.0], 1.3, 400_000, 11).unwrap();
    let exact = ball_difference_exact(3, 0.5, 1.3).unwrap();
    assert!(est.lower() <= exact && exact <= est.upper(), "{exact} vs {est:?}");
}

#[test]
fn fermat_point_beats_brute_force_search() {
    let tris = [
        ([0.0, 0.0], [4.0, 0.0], [1.0, 3.0]),
        ([0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]),
        ([-2.0, 1.0], [3.0, -1.0], [0.5, 4.0]),
    ];
    for (a, b, c) in tris {
        let fp = fermat_point(a, b, c);
        let total = |p: [f64; 2]| -> f64 {
            [a, b, c].iter().map(|v| ((p[0] - v[0]).powi(2) + (p[1] - v[1]).powi(2)).sqrt()).sum()
        };
        let mut best = f64::INFINITY;
        let mut center = [0.0, 0.0];
        let mut span = 10.0;
        for _ in 0..40 {
            let c0 = center;
            for i in -20..=20 {
                for j in -20..=20 {
                    let p = [c0[0] + span * i as f64 / 20.0, c0[1] + span * j as f64 / 20.0];
                    let t = total(p);
                    if t < best {
                        best = t;
                        center = p;
                    }
                }
            }
            span *= 0.5;
        }
        assert!(fp.total <= best + 1e-12, "{} vs {best}", fp.total);
        assert!((fp.total - best).abs() < 1e-9);
        assert!((total(fp.point) - fp.total).abs() < 1e-12);
    }
}

#[test]
fn equilateral_fermat_point_is_the_centroid() {
    let s3 = 3f64.sqrt();
    let fp = fermat_point([0.0, 0.0], [2.0, 0.0], [1.0, s3]);
    assert!((fp.point[0] - 1.0).abs() < 1e-9 && (fp.point[1] - s3 / 3.0).abs() < 1e-9);
    assert!((fp.total - 2.0 * s3).abs() < 1e-12);
}

#[test]
fn linear_fit_recovers_exact_line() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
    let ys: Vec<f64> = xs.iter().map(|x| -1.862096 * x + 0.7).collect();
    let (slope, icpt) = linear_fit(&xs, &ys);
    assert!((slope + 1.862096).abs() < 1e-12 && (icpt - 0.7).abs() < 1e-12);
}
