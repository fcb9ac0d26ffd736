mod common;

use std::f64::consts::PI;

use common::*;
use rand::Rng;
use thetalab::curves::*;
use thetalab::siegel::TruncationPolicy;
use thetalab::soliton::{sasaki_irreducibility, solve_effectivization, EffectivizationKind, SolveOptions};
use thetalab::{Complex64, Error};

fn real_points(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| c(x, 0.0)).collect()
}

fn tau_of(points: Vec<Complex64>, infinity: bool) -> Complex64 {
    let curve = HyperellipticCurve::new(points, infinity).unwrap();
    period_matrix(&curve, 64).unwrap().normalized.matrix()[(0, 0)]
}

/// Arithmetic-geometric mean, choosing the root closer to the arithmetic mean.
fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
    for _ in 0..60 {
        let an = (a + b) * 0.5;
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
    }
    a
}

fn tau_agm(lambda: f64) -> Complex64 {
    let k = |m: f64| PI / (2.0 * agm(c(1.0, 0.0), c((1.0 - m).sqrt(), 0.0)).re);
    c(0.0, k(1.0 - lambda) / k(lambda))
}

fn reduce(mut tau: Complex64) -> Complex64 {
    for _ in 0..100 {
        tau.re -= tau.re.round();
        if tau.norm_sqr() < 1.0 - 1e-14 {
            tau = -tau.inv();
        } else {
            break;
        }
    }
    tau
}

/// Distance in the fundamental domain, allowing for boundary identifications.
fn modular_distance(a: Complex64, b: Complex64) -> f64 {
    let (a, b) = (reduce(a), reduce(b));
    [b, b + 1.0, b - 1.0, -b.inv()].iter().map(|x| (a - x).norm()).fold(f64::INFINITY, f64::min)
}

fn j_from_lambda(l: Complex64) -> Complex64 {
    let one = c(1.0, 0.0);
    (l * l - l + one).powu(3) * 256.0 / (l * l * (l - one) * (l - one))
}

fn j_from_tau(tau: Complex64) -> Complex64 {
    let q = (c(0.0, PI) * tau).exp();
    let mut t2 = c(0.0, 0.0);
    let mut t3 = c(0.0, 0.0);
    for n in -30i32..=30 {
        let h = n as f64 + 0.5;
        t2 += (c(0.0, PI) * tau * h * h).exp();
        t3 += q.powi(n * n);
    }
    j_from_lambda((t2 / t3).powu(4))
}

fn cross_ratio(e: &[Complex64; 4]) -> Complex64 {
    (e[2] - e[0]) * (e[1] - e[3]) / ((e[2] - e[3]) * (e[1] - e[0]))
}

#[test]
fn genus_one_matches_agm() {
    // {0, 1, λ, ∞}: the Legendre curve
    for lambda in [0.5, 0.2, 0.9, 0.05, 0.7] {
        let tau = tau_of(real_points(&[0.0, 1.0, lambda]), true);
        let expected = tau_agm(lambda);
        assert!(modular_distance(tau, expected) < 1e-8, "λ={lambda}: {tau} vs {expected}");
    }
    let frozen = c(0.0, 1.3600706381318232);
    assert!((tau_agm(0.2) - frozen).norm() < 1e-12);
}

#[test]
fn genus_one_real_symmetric_is_rectangular() {
    let tau = tau_of(real_points(&[-1.0, 0.0, 1.0]), true);
    assert!(reduce(tau).re.abs() < 1e-8, "{tau}");
    let tau = tau_of(real_points(&[0.0, 1.0, 3.0, 4.0]), false);
    assert!((tau - c(0.0, 1.5634019226961115)).norm() < 1e-10, "{tau}");
}

#[test]
fn genus_one_complex_points_match_j_invariant() {
    let mut r = rng(1);
    for _ in 0..5 {
        let e: [Complex64; 4] = std::array::from_fn(|_| c(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)));
        let tau = tau_of(e.to_vec(), false);
        let (jt, jl) = (j_from_tau(tau), j_from_lambda(cross_ratio(&e)));
        assert!(rel(jt, jl) < 1e-7, "{jt} vs {jl}");
    }
}

#[test]
fn genus_one_mobius_covariance() {
    let e = [c(-0.3, 0.2), c(0.8, -0.5), c(1.4, 0.9), c(2.2, 0.1)];
    let base = tau_of(e.to_vec(), false);
    let (a, b, cc, d) = (c(1.0, 0.5), c(-0.2, 0.1), c(0.3, -0.1), c(1.0, 0.0));
    let moved: Vec<Complex64> = e.iter().map(|x| (a * x + b) / (cc * x + d)).collect();
    assert!(modular_distance(base, tau_of(moved, false)) < 1e-8);
}

fn frozen_genus_two(points: &[f64], expected: [f64; 3]) {
    let curve = HyperellipticCurve::new(real_points(points), false).unwrap();
    let p = period_matrix(&curve, 64).unwrap();
    let b = p.normalized.matrix();
    let want = [[expected[0], expected[1]], [expected[1], expected[2]]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((b[(i, j)] - c(0.0, want[i][j])).norm() < 1e-10, "{b}");
        }
    }
    assert!(p.quadrature_change < 1e-8);
}

#[test]
fn genus_two_real_points_match_high_precision_oracle() {
    frozen_genus_two(&[-2.0, -1.0, 0.0, 1.0, 2.5, 4.0], [1.6995322364510902, 0.88947625978220606, 1.3565665145403295]);
    frozen_genus_two(&[0.0, 1.0, 2.0, 3.5, 5.0, 9.0], [1.5454417801859214, 0.73607068205499681, 1.1323825500302966]);
}

#[test]
fn genus_two_affine_images_agree() {
    let pts = real_points(&[-2.0, -1.0, 0.0, 1.0, 2.5, 4.0]);
    let base = period_matrix(&HyperellipticCurve::new(pts.clone(), false).unwrap(), 64).unwrap();
    let moved: Vec<Complex64> = pts.iter().map(|x| x * 1.7 + c(3.0, 0.4)).collect();
    let other = period_matrix(&HyperellipticCurve::new(moved, false).unwrap(), 64).unwrap();
    assert!((base.normalized.matrix() - other.normalized.matrix()).norm() < 1e-10);
}

#[test]
fn genus_two_with_infinity_feeds_kp() {
    let curve = HyperellipticCurve::new(real_points(&[0.0, 1.0, 2.0, 3.5, 5.0]), true).unwrap();
    assert_eq!(curve.genus(), 2);
    let p = period_matrix(&curve, 64).unwrap();
    let om = &p.normalized;
    assert!(om.min_eigenvalue() > 0.0);
    let policy = TruncationPolicy::default();
    assert!(sasaki_irreducibility(om, &policy).unwrap().is_irreducible);
    let s = solve_effectivization(EffectivizationKind::Kp, om, &policy, 5, None, &SolveOptions::default()).unwrap();
    assert!(s.residual < 1e-8, "{}", s.residual);
}

#[test]
fn genus_two_complex_points_are_siegel_and_solvable() {
    let mut r = rng(2);
    let policy = TruncationPolicy::default();
    for trial in 0..5 {
        let pts: Vec<Complex64> = (0..6).map(|i| c(i as f64 + r.random_range(-0.3..0.3), r.random_range(-1.0..1.0))).collect();
        let p = period_matrix(&HyperellipticCurve::new(pts, false).unwrap(), 64).unwrap();
        let raw = p.a_periods.clone().try_inverse().unwrap() * &p.b_periods;
        let asym = (raw[(0, 1)] - raw[(1, 0)]).norm();
        assert!(asym < 1e-8, "trial {trial}: asymmetry {asym}");
        let s = solve_effectivization(EffectivizationKind::Kp, &p.normalized, &policy, trial, None, &SolveOptions::default()).unwrap();
        assert!(s.residual < 1e-8);
    }
}

#[test]
fn quadrature_doubling_is_checked() {
    let curve = HyperellipticCurve::new(real_points(&[0.0, 1.0, 1.0005, 3.0]), false).unwrap();
    assert!(matches!(period_matrix(&curve, 32), Err(Error::QuadratureNotConverged { .. })));
    let curve = HyperellipticCurve::new(real_points(&[0.0, 1.0, 2.0, 3.0]), false).unwrap();
    let p32 = period_matrix(&curve, 32).unwrap();
    let p64 = period_matrix(&curve, 64).unwrap();
    assert!((p32.normalized.matrix() - p64.normalized.matrix()).norm() < 1e-8);
}

#[test]
fn branch_collision_and_parsing() {
    let r = HyperellipticCurve::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0 + 1e-12, 0.0)], true);
    assert!(matches!(r, Err(Error::BranchCollision { .. })));
    let curve: HyperellipticCurve = serde_json::from_str(r#"[0, 1, 2, [3.5, 0], 5, "inf"]"#).unwrap();
    assert!(curve.infinity && curve.genus() == 2);
    let curve: HyperellipticCurve = serde_json::from_str(r#"{"branch_points": [0, 1, [0.5, 0.1]], "infinity": true}"#).unwrap();
    assert_eq!(curve.genus(), 1);
    assert!(serde_json::from_str::<HyperellipticCurve>(r#"[0, 1, 2, 3, 4]"#).is_err());
}

#[test]
fn prym_ramified_example() {
    let pi = scalar(c(0.0, 1.0));
    let b0 = scalar(c(0.0, 2.0));
    let b = assemble_ramified(&pi, &b0).unwrap();
    let m = b.matrix();
    assert!((m[(0, 0)] - c(0.0, 1.5)).norm() < 1e-15 && (m[(0, 1)] - c(0.0, -0.5)).norm() < 1e-15);
}
