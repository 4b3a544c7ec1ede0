use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use toroidal::eigen::normalization;
use toroidal::{AspectRatio, BranchId, BranchMap, Eigenvalue, Error, Kernel, Pole, Primitives};

fn setup(a: f64) -> (Primitives, BranchMap) {
    let p = Primitives::new(AspectRatio::new(a).unwrap());
    (p, BranchMap::from_primitives(p).unwrap())
}

#[test]
fn kernel_at_origin_is_the_normalization() {
    for a in [1.5, 2.0, 7.0] {
        let (p, _) = setup(a);
        let k = Kernel::new(&p, &Eigenvalue::new(3, &p));
        let v = k.value(0.0).unwrap();
        assert_eq!(v.im, 0.0);
        assert!((v.re - normalization(AspectRatio::new(a).unwrap())).abs() < 1e-15);
    }
}

#[test]
fn kernel_is_continuous_across_pi() {
    let (p, _) = setup(2.0);
    let k = Kernel::new(&p, &Eigenvalue::new(1, &p));
    let mut prev = f64::INFINITY;
    for eps in [1e-3, 1e-5, 1e-7, 1e-9] {
        let gap = (k.value(PI - eps).unwrap() - k.value(PI + eps).unwrap()).norm();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-9);
}

#[test]
fn periodicity_defect_equals_unquantized_phase() {
    let (p, _) = setup(2.0);
    for n in [-2, 1, 4] {
        let k = Kernel::new(&p, &Eigenvalue::new(n, &p));
        assert!((k.value(TAU).unwrap() - k.value(0.0).unwrap()).norm() < 1e-10);
    }
    let t3 = 1.5 * Eigenvalue::new(1, &p).t3;
    let k = Kernel::with_t3(&p, t3);
    let ratio = k.value(TAU).unwrap() / k.value(0.0).unwrap();
    assert!((ratio.norm() - 1.0).abs() < 1e-12);
    let expected = Complex64::from_polar(1.0, t3 * p.jump());
    assert!((ratio - expected).norm() < 1e-10);
    assert!(((ratio - 1.0).norm() - (expected - 1.0).norm()).abs() < 1e-10);
}

#[test]
fn kernel_refuses_singular_angles() {
    let (p, _) = setup(2.0);
    let k = Kernel::new(&p, &Eigenvalue::new(1, &p));
    let ang = p.operator().singular_angles();
    assert!(matches!(k.value(ang.first), Err(Error::Pole { .. })));
    assert!(matches!(k.value(ang.second), Err(Error::Pole { .. })));
    assert!(matches!(k.value(-0.1), Err(Error::AngleOutOfRange { .. })));
}

#[test]
fn forward_map_landmarks() {
    let (p, map) = setup(2.0);
    assert_eq!(map.forward(0.0).unwrap(), 0.0);
    assert!((map.forward(TAU).unwrap() - p.jump()).abs() < 1e-14);
    let (l, r) = (map.forward(PI - 1e-9).unwrap(), map.forward(PI + 1e-9).unwrap());
    assert!((l - r).abs() < 1e-8);
    assert_eq!(map.classify(0.0).unwrap().id, BranchId::D1);
    assert_eq!(map.classify(PI).unwrap().id, BranchId::D2);
    assert_eq!(map.classify(TAU).unwrap().id, BranchId::D3);
}

#[test]
fn forward_map_orientation_per_branch() {
    let (_, map) = setup(2.0);
    for id in [BranchId::D1, BranchId::D2, BranchId::D3] {
        let d = map.domain(id);
        let ys: Vec<f64> = (1..200)
            .map(|k| d.theta_lo + (d.theta_hi - d.theta_lo) * k as f64 / 200.0)
            .map(|t| map.forward(t).unwrap())
            .collect();
        let increasing = ys.windows(2).all(|w| w[1] > w[0]);
        let decreasing = ys.windows(2).all(|w| w[1] < w[0]);
        assert_eq!(increasing, d.c1_sign > 0.0, "{id}");
        assert_eq!(decreasing, d.c1_sign < 0.0, "{id}");
    }
}

#[test]
fn inverse_round_trip_and_endpoints() {
    let (_, map) = setup(2.0);
    let d1 = map.domain(BranchId::D1);
    let y = map.forward(1.2).unwrap() - d1.shift;
    assert!((map.inverse(y, BranchId::D1).unwrap() - 1.2).abs() < 1e-10);
    assert_eq!(map.inverse(0.0, BranchId::D1).unwrap(), 0.0);
    assert!(matches!(map.inverse(0.5, BranchId::D1), Err(Error::OutOfRange { .. })));
    assert!(matches!(map.inverse(-0.5, BranchId::D3), Err(Error::OutOfRange { .. })));
}

#[test]
fn asymptotic_form_tracks_inversion() {
    let (_, map) = setup(2.0);
    let cases = [
        (-20.0, BranchId::D1, Pole::First),
        (-10.0, BranchId::D1, Pole::First),
        (-5.0, BranchId::D2, Pole::First),
        (5.0, BranchId::D2, Pole::Second),
        (5.0, BranchId::D3, Pole::Second),
    ];
    for (y, id, pole) in cases {
        let exact = map.inverse_point(y, id).unwrap();
        assert_eq!(exact.pole, pole);
        let approx = map.asymptotic_offset(y + map.domain(id).shift, pole);
        assert!((approx / exact.offset.abs() - 1.0).abs() < 0.01, "{id} y={y}");
    }
    assert!(map.asymptotic_error(-20.0).unwrap() < 0.01);
    let d1 = map.asymptotic_theta(-1.0, BranchId::D1).unwrap();
    assert!(d1 < map.domain(BranchId::D1).theta_hi);
}

#[test]
fn log_distance_slope_is_the_rate() {
    let (p, map) = setup(2.0);
    let ys: Vec<f64> = (0..=20).map(|k| -30.0 + k as f64).collect();
    let ls: Vec<f64> = ys
        .iter()
        .map(|&y| map.inverse_point(y, BranchId::D1).unwrap().offset.abs().ln())
        .collect();
    let n = ys.len() as f64;
    let (my, ml) = (ys.iter().sum::<f64>() / n, ls.iter().sum::<f64>() / n);
    let cov: f64 = ys.iter().zip(&ls).map(|(y, l)| (y - my) * (l - ml)).sum();
    let var: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = cov / var;
    assert!((slope / p.rate() - 1.0).abs() < 1e-6, "{slope} vs {}", p.rate());
    assert!(map.asymptotic_log_offset(-10.0, Pole::First) < 0.0);
}

#[test]
fn rate_positive_across_aspect_ratios() {
    for a in [1.001, 1.5, 3.0, 50.0] {
        assert!(setup(a).0.rate() > 0.0);
    }
}

#[test]
fn c1_follows_linear_law_near_first_pole() {
    let (p, _) = setup(2.0);
    let op = p.operator();
    let t0 = op.singular_angles().first;
    let slope = op.c1_slope(Pole::First);
    let a: f64 = 2.0;
    let s = op.s();
    let x = -a.powi(4) + 4.0 * a * a - 1.0 + s * (a * a + 1.0);
    let closed = 2.0 * 2f64.sqrt() / (3.0 * a) * (x * s * s).sqrt();
    assert!((slope / closed - 1.0).abs() < 1e-14);
    let mut prev = f64::INFINITY;
    for d in [1e-2, 1e-4, 1e-6] {
        let ratio = op.c1(t0 + d) / (slope * d);
        let dev = (ratio - 1.0).abs();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-5);
}
