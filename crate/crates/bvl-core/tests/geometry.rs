mod common;

use bvl_core::geometry::{
    build_contour, build_cutoff_family, bump, contour_fermi_check, contour_winding_check, derivative_bound_check,
    fermi_factor, green_constant_potential, holder_gap_study, partition_residuals, script_r_kernel, smooth_step,
    spin_kernel_monte_carlo, verify_orbital_kernel_integral, verify_spin_kernel_integral, Admissibility,
    KernelQuadrature,
};
use bvl_core::potentials::PeriodicPotential;
use bvl_core::semiclassics::loglog_slope;
use bvl_core::Error;
use common::{rel, simpson};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn relaxed(alpha: f64, hbar: f64) -> bvl_core::geometry::CutoffFamily {
    build_cutoff_family(alpha, hbar, Admissibility::Relaxed).unwrap()
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn partition_of_unity_and_product_identities() {
    for (alpha, hbar) in [(0.5, 0.1), (0.3, 0.2), (0.7, 0.05)] {
        let family = relaxed(alpha, hbar);
        let r = partition_residuals(&family, 20);
        assert!(r.partition <= 1e-12, "alpha={alpha} hbar={hbar}: {r:?}");
        assert!(r.hat_product <= 1e-14 && r.double_hat_product <= 1e-14, "{r:?}");
        assert!(r.range.0 >= 0.0 && r.range.1 <= 1.0);
    }
}

#[test]
fn supports_and_plateaus() {
    let family = relaxed(0.5, 0.1);
    let s = family.scale;
    let k = [0, 1, -1];
    let c = family.center(k);
    let at = |d: [f64; 3]| [c[0] + d[0] * s, c[1] + d[1] * s, c[2] + d[2] * s];
    assert_eq!(family.tau(k, at([1.0, 0.0, 0.0])), 0.0);
    assert!(family.tau(k, at([0.99, 0.0, 0.0])) > 0.0);
    assert_eq!(family.tau_hat(k, at([1.5, -1.5, 1.5])), 1.0);
    assert_eq!(family.tau_hat(k, at([2.0, 0.0, 0.0])), 0.0);
    assert_eq!(family.tau_double_hat(k, at([2.5, 2.5, -2.5])), 1.0);
    assert_eq!(family.tau_double_hat(k, at([0.0, 3.0, 0.0])), 0.0);
    assert_eq!(bump(1.0), 0.0);
    assert!((bump(0.0) - (-1.0f64).exp()).abs() < 1e-16);
    assert_eq!(smooth_step(0.0), 0.0);
    assert_eq!(smooth_step(1.0), 1.0);
    assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
}

#[test]
fn center_count_follows_power_law() {
    for alpha in [0.2, 0.3] {
        let scaled: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| relaxed(alpha, h).center_count() as f64 * h.powf(3.0 - 3.0 * alpha))
            .collect();
        let high = scaled.iter().copied().fold(f64::MIN, f64::max);
        let low = scaled.iter().copied().fold(f64::MAX, f64::min);
        assert!(high / low <= 2.0, "alpha={alpha}: {scaled:?}");
    }
    let family = relaxed(0.5, 0.1);
    assert_eq!(family.max_index, 2);
    assert_eq!(family.center_count(), 125);
}

#[test]
fn derivative_ratios_scale_with_hbar() {
    let zero = derivative_bound_check(&relaxed(0.5, 0.1), [0, 0, 0], 400).unwrap();
    assert!(zero.ratio <= 1.0);
    for order in [[1, 0, 0], [0, 1, 1], [2, 0, 0]] {
        let coarse = derivative_bound_check(&relaxed(0.5, 0.1), order, 400).unwrap();
        let fine = derivative_bound_check(&relaxed(0.5, 0.05), order, 400).unwrap();
        if order.iter().sum::<u32>() == 1 {
            assert!(rel(fine.ratio, coarse.ratio) <= 0.1, "{order:?}: {coarse:?} vs {fine:?}");
        }
        assert!(coarse.support_constant > 0.0);
        assert!(rel(fine.support_constant, coarse.support_constant) <= 0.05, "{order:?}");
    }
    assert!(derivative_bound_check(&relaxed(0.5, 0.1), [3, 0, 0], 400).is_err());
}

#[test]
fn strict_admissibility_rejects_large_hbar() {
    match build_cutoff_family(0.5, 0.1, Admissibility::Strict) {
        Err(Error::Admissibility { limit, .. }) => assert!((limit - 69f64.powi(-2)).abs() < 1e-15),
        other => panic!("expected admissibility error, got {other:?}"),
    }
    assert!(build_cutoff_family(0.5, 1e-4, Admissibility::Strict).is_ok());
    assert!(build_cutoff_family(1.0, 0.1, Admissibility::Relaxed).is_err());
    assert!(build_cutoff_family(0.5, 1.0, Admissibility::Relaxed).is_err());
}

#[test]
fn green_function_normalization() {
    for (xi, v) in [(real(-2.0), 0.0), (Complex64::new(-1.0, 0.5), 0.3), (Complex64::new(0.4, -0.8), 0.1)] {
        let sigma = (-2.0 * (xi - v)).sqrt();
        let rmax = 60.0 / sigma.re;
        let radial = |r: f64| -> Complex64 {
            if r == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            green_constant_potential([0.0; 3], [r, 0.0, 0.0], xi, v).unwrap() * r * r
        };
        let re = simpson(0.0, rmax, 40_000, |r| radial(r).re);
        let im = simpson(0.0, rmax, 40_000, |r| radial(r).im);
        let total = Complex64::new(re, im) * 4.0 * PI;
        let expected = 2.0 / (sigma * sigma);
        assert!((total - expected).norm() <= 1e-8 * expected.norm(), "xi={xi}");
        assert!(((1.0 / (v - xi)) - expected).norm() < 1e-14);
    }
}

#[test]
fn green_function_is_real_positive_for_negative_energy() {
    for r in [0.1, 1.0, 5.0] {
        let g = green_constant_potential([0.2, 0.0, 0.0], [0.2, r, 0.0], real(-2.0), 0.0).unwrap();
        assert_eq!(g.im, 0.0);
        assert!(g.re > 0.0);
    }
    assert!(matches!(green_constant_potential([0.0; 3], [0.0; 3], real(-1.0), 0.0), Err(Error::Domain(_))));
    assert!(matches!(green_constant_potential([0.0; 3], [1.0, 0.0, 0.0], real(0.5), 0.0), Err(Error::Domain(_))));
}

#[test]
fn green_function_decay_fit() {
    let xi = Complex64::new(-1.0, 2.0);
    let sigma = (-2.0 * xi).sqrt();
    let points: Vec<(f64, f64)> = (1..=20)
        .map(|i| {
            let r = 0.5 * i as f64;
            let g = green_constant_potential([0.0; 3], [0.0, 0.0, r], xi, 0.0).unwrap();
            (r, (g.norm() * r).ln())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + sigma.re).abs() < 1e-12);
    let theta_xi = sigma.re;
    assert!(theta_xi > 0.0 && theta_xi * (1.0 + xi.norm()) > 0.0);
}

#[test]
fn script_r_collapses_for_constant_potential() {
    let family = relaxed(0.5, 0.1);
    let v0 = 0.35;
    let flat = PeriodicPotential::custom("flat", Arc::new(move |_| v0), 1.0, 0.0, v0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let half = family.cell_half_width();
    let s = family.scale;
    for _ in 0..50 {
        let y = [
            rng.random_range(-half..half),
            rng.random_range(-half..half),
            rng.random_range(-half..half),
        ];
        let x = [
            y[0] + rng.random_range(-0.45..0.45) * s,
            y[1] + rng.random_range(-0.45..0.45) * s,
            y[2] + rng.random_range(-0.45..0.45) * s,
        ];
        let xi = Complex64::new(-1.0, 0.3);
        let k = script_r_kernel(&family, &flat, x, y, xi).unwrap();
        let g = green_constant_potential(x, y, xi, v0).unwrap();
        assert!((k - g).norm() <= 1e-12 * g.norm());
    }
}

#[test]
fn script_r_kernel_decays_like_slowest_green_function() {
    let family = relaxed(0.5, 0.1);
    let v = PeriodicPotential::triple_cosine(0.5).unwrap();
    let xi = real(-3.0);
    let slowest = (2.0 * (-v.sup_norm - xi.re)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let d = rng.random_range(0.05..6.0);
        let x = [y[0] + d, y[1], y[2]];
        let k = script_r_kernel(&family, &v, x, y, xi).unwrap();
        assert!(k.norm() * d <= (-slowest * d).exp() / (2.0 * PI) * (1.0 + 1e-12));
    }
}

#[test]
fn holder_gap_slope_matches_exponent() {
    let cosine = holder_gap_study(&PeriodicPotential::triple_cosine(0.5).unwrap(), 0.5, &[1e-4, 1e-5, 1e-6], 200, 9).unwrap();
    assert!((cosine.predicted - 0.5).abs() < 1e-15);
    assert!(cosine.slope.slope >= cosine.predicted - 0.1, "{cosine:?}");
    let rough = PeriodicPotential::weierstrass(0.5, 4, 12).unwrap();
    let study = holder_gap_study(&rough, 0.5, &[1e-2, 1e-3, 1e-4], 200, 10).unwrap();
    assert!(study.slope.slope >= study.predicted - 0.1, "{study:?}");
    let (slope, _) = loglog_slope(&study.slope.points);
    assert_eq!(slope, study.slope.slope);
}

#[test]
fn orbital_kernel_closed_form_and_symmetry() {
    let quad = KernelQuadrature::default();
    for (xi, v, hbar) in [(real(-2.0), 0.0, 0.5), (Complex64::new(-1.0, 0.7), 0.2, 0.3)] {
        let check = verify_orbital_kernel_integral(xi, v, hbar, &quad).unwrap();
        assert!(check.relative_gap <= 1e-6, "xi={xi}: {check:?}");
        let (first, second) = bvl_core::geometry::orbital_kernel_components(xi, v, hbar, &quad).unwrap();
        assert!((first - second).norm() <= 1e-10 * first.norm());
    }
    let a = verify_orbital_kernel_integral(real(-2.0), 0.0, 0.5, &quad).unwrap();
    let b = verify_orbital_kernel_integral(real(-2.0), 0.0, 0.25, &quad).unwrap();
    assert!(((a.lhs / b.lhs).norm() / 8.0 - 1.0).abs() <= 1e-6);
}

#[test]
fn spin_kernel_scaling_laws() {
    let quad = KernelQuadrature::default();
    let a = verify_spin_kernel_integral(real(-2.0), 0.0, 0.5, &quad).unwrap();
    let b = verify_spin_kernel_integral(real(-2.0), 0.0, 0.25, &quad).unwrap();
    assert!(((a.lhs / b.lhs).norm() / 8.0 - 1.0).abs() <= 1e-6);
    let deep = verify_spin_kernel_integral(real(-8.0), 0.0, 0.5, &quad).unwrap();
    assert!(((a.lhs / deep.lhs).norm() / 8.0 - 1.0).abs() <= 1e-4);
    assert!(a.relative_gap <= 1e-6, "{a:?}");
    let complex = verify_spin_kernel_integral(Complex64::new(-1.0, 0.6), 0.1, 0.4, &quad).unwrap();
    assert!(complex.relative_gap <= 1e-6, "{complex:?}");
}

#[test]
fn spin_kernel_matches_monte_carlo() {
    let quad = KernelQuadrature::default();
    let exact = verify_spin_kernel_integral(real(-2.0), 0.0, 0.5, &quad).unwrap().lhs.re;
    let (mean, se) = spin_kernel_monte_carlo(-2.0, 0.0, 0.5, 400_000, 21).unwrap();
    assert!(se > 0.0 && se < 0.05 * exact);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} +- {se} vs {exact}");
}

#[test]
fn contour_has_unit_winding_around_interior_points() {
    let c = build_contour(1.0, 1.0, None, 4000).unwrap();
    assert!((c.delta + 2.0).abs() < 1e-15);
    assert!((c.half_height - PI / 2.0).abs() < 1e-15);
    assert!(c.nodes.iter().all(|(xi, _)| xi.im.abs() < PI));
    for lambda in [1.0, -1.5, 30.0] {
        let w = contour_winding_check(&c, lambda);
        assert!((w - Complex64::new(0.0, 2.0 * PI)).norm() <= 1e-8, "lambda={lambda}: {w}");
    }
    let outside = contour_winding_check(&c, -5.0);
    assert!(outside.norm() <= 1e-8);
}

#[test]
fn contour_reproduces_fermi_factor() {
    let c = build_contour(1.0, 1.0, None, 4000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let lambda = rng.random_range(-1.5..20.0);
        let z = 10f64.powf(rng.random_range(-3.0..2.0));
        let got = contour_fermi_check(&c, z, lambda);
        let e = z * (-lambda).exp();
        assert!((got - real(e / (1.0 + e))).norm() <= 1e-8, "lambda={lambda} z={z}");
        assert_eq!(fermi_factor(1.0, z, real(lambda)).im, 0.0);
    }
}

#[test]
fn doubling_truncation_is_negligible() {
    let short = build_contour(1.0, 1.0, Some(40.0), 4000).unwrap();
    let long = build_contour(1.0, 1.0, Some(80.0), 8000).unwrap();
    for lambda in [-0.5, 2.0, 10.0] {
        let a = contour_fermi_check(&short, 0.1, lambda);
        let b = contour_fermi_check(&long, 0.1, lambda);
        assert!((a - b).norm() <= 1e-10, "lambda={lambda}");
    }
    assert!(build_contour(-1.0, 1.0, None, 100).is_err());
}
