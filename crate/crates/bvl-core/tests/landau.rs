mod common;

use bvl_core::landau::{
    landau_field_derivatives, landau_pressure, landau_susceptibility_zero_field, matched_fugacity,
    richardson_second_derivative, zero_field_density, zero_field_pressure, LandauSumSpec,
};
use bvl_core::potentials::PeriodicPotential;
use bvl_core::semiclassics::{bulk_density_semiclassical, susceptibility_leading_terms, ThermoParams};
use bvl_core::Error;
use common::rel;
use std::f64::consts::PI;

/// Alternating series Σ (−1)^{k+1} z^k / k^ν, valid for z < 1.
fn fermi_series(nu: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 1..400 {
        power *= -z;
        let term = -power / (k as f64).powf(nu);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Zero-field pressure of both spin branches: 2β⁻¹λ⁻³ f_{5/2}(z) with λ = ħ√(2πβ).
fn pressure_series(params: &ThermoParams, z: f64) -> f64 {
    let lambda = params.hbar * (2.0 * PI * params.beta).sqrt();
    2.0 / params.beta * fermi_series(2.5, z) / lambda.powi(3)
}

#[test]
fn zero_field_pressure_matches_series() {
    for (beta, hbar, z) in [(1.0, 0.5, 0.1), (2.0, 0.2, 0.5), (0.5, 1.0, 1e-3)] {
        let p = ThermoParams::new(beta, 1.0, hbar);
        let got = zero_field_pressure(&p, z).unwrap();
        assert!(rel(got, pressure_series(&p, z)) < 1e-12, "beta={beta} hbar={hbar} z={z}");
        let lambda = hbar * (2.0 * PI * beta).sqrt();
        let density = 2.0 * fermi_series(1.5, z) / lambda.powi(3);
        assert!(rel(zero_field_density(&p, z).unwrap(), density) < 1e-12);
    }
}

#[test]
fn pressure_is_even_in_field() {
    let spec = LandauSumSpec::default();
    for (g, b) in [(2.0, 0.7), (0.0, 1.3), (2.0, 0.05)] {
        let p = ThermoParams::new(1.0, 1.0, 0.5).with_g(g);
        let plus = landau_pressure(&p.with_b(b), 0.1, &spec).unwrap();
        let minus = landau_pressure(&p.with_b(-b), 0.1, &spec).unwrap();
        assert!(rel(plus, minus) <= 1e-12, "g={g} b={b}: {plus} vs {minus}");
    }
}

#[test]
fn weak_field_matches_zero_field_closed_form() {
    let p = ThermoParams::new(1.0, 1.0, 0.5);
    let closed = pressure_series(&p, 0.1);
    let weak = landau_pressure(&p.with_b(1e-3), 0.1, &LandauSumSpec::default()).unwrap();
    assert!((weak - closed).abs() <= 1e-6 * closed, "gap {}", rel(weak, closed));
    assert_eq!(landau_pressure(&p, 0.1, &LandauSumSpec::default()).unwrap(), zero_field_pressure(&p, 0.1).unwrap());
}

#[test]
fn degeneracy_normalization_at_small_field() {
    for (beta, hbar) in [(1.0, 0.5), (2.0, 0.25)] {
        let p = ThermoParams::new(beta, 1.0, hbar).with_g(0.0);
        let b = 1e-3 / (beta * hbar);
        let sum = landau_pressure(&p.with_b(b), 0.2, &LandauSumSpec::default()).unwrap();
        assert!(rel(sum, pressure_series(&p, 0.2)) <= 1e-5);
    }
}

#[test]
fn fugacity_derivative_gives_semiclassical_density() {
    let p = ThermoParams::new(1.3, 1.0, 0.4);
    let spec = LandauSumSpec::default();
    for z in [1e-3, 0.1, 0.8] {
        let pz = |zz: f64| landau_pressure(&p, zz, &spec).unwrap();
        let h = 1e-3 * z;
        let d1 = (pz(z + h) - pz(z - h)) / (2.0 * h);
        let d2 = (pz(z + 2.0 * h) - pz(z - 2.0 * h)) / (4.0 * h);
        let derivative = (4.0 * d1 - d2) / 3.0;
        let from_pressure = p.beta * z * derivative;
        let semiclassical = bulk_density_semiclassical(&p, z, &PeriodicPotential::zero()).unwrap();
        assert!(rel(from_pressure, semiclassical) <= 1e-8, "z={z}: {from_pressure} vs {semiclassical}");
        assert!(rel(zero_field_density(&p, z).unwrap(), semiclassical) <= 1e-10);
    }
}

#[test]
fn orbital_is_minus_one_third_of_spin_when_dilute() {
    let spec = LandauSumSpec::default();
    for (beta, hbar, z) in [(1.0, 0.5, 1e-3), (2.0, 0.3, 1e-4), (0.7, 1.0, 5e-4)] {
        let p = ThermoParams::new(beta, 1.0, hbar);
        let x = landau_susceptibility_zero_field(&p, z, &spec).unwrap();
        assert!(rel(x.orbital, -x.spin / 3.0) <= 1e-4, "beta={beta} hbar={hbar}: {x:?}");
        assert!(x.orbital < 0.0 && x.spin > 0.0);
    }
}

#[test]
fn fixed_density_total_approaches_one_sixth() {
    for hbar in [0.05, 0.02] {
        let p = ThermoParams::new(1.0, 1.0, hbar);
        let z = matched_fugacity(&p).unwrap();
        assert!(z <= 1e-3, "z = {z}");
        let x = landau_susceptibility_zero_field(&p, z, &LandauSumSpec::default()).unwrap();
        let ratio = x.total / (p.rho * p.beta * hbar * hbar);
        assert!(rel(ratio, 1.0 / 6.0) <= 1e-2, "hbar={hbar}: ratio {ratio}");
        let lead = susceptibility_leading_terms(&p);
        assert!(rel(x.total, lead.total) <= 1e-2);
    }
}

#[test]
fn zero_field_magnetization_vanishes() {
    let p = ThermoParams::new(1.0, 1.0, 0.5);
    let d = landau_field_derivatives(&p, 0.1, &LandauSumSpec::default()).unwrap();
    let scale = d.second.abs() * LandauSumSpec::default().step(&p) + zero_field_pressure(&p, 0.1).unwrap();
    assert!(d.first.abs() <= 1e-10 * scale, "magnetization {}", d.first);
}

#[test]
fn orbital_part_is_diamagnetic() {
    let spec = LandauSumSpec::default();
    for beta in [0.5, 1.0, 3.0] {
        for z in [1e-3, 0.3, 2.0] {
            for hbar in [0.3, 0.8] {
                let p = ThermoParams::new(beta, 1.0, hbar);
                let x = landau_susceptibility_zero_field(&p, z, &spec).unwrap();
                assert!(x.orbital < 0.0, "beta={beta} z={z} hbar={hbar}: {x:?}");
            }
        }
    }
}

#[test]
fn truncated_level_sum_reports_tail() {
    let p = ThermoParams::new(1.0, 1.0, 0.5).with_b(0.5);
    let spec = LandauSumSpec {
        level_cutoff: Some(5),
        ..Default::default()
    };
    match landau_pressure(&p, 0.1, &spec) {
        Err(Error::Accuracy { achieved, requested, .. }) => assert!(achieved > requested),
        other => panic!("expected accuracy error, got {other:?}"),
    }
    let generous = LandauSumSpec {
        level_cutoff: Some(400),
        ..Default::default()
    };
    let a = landau_pressure(&p, 0.1, &generous).unwrap();
    let b = landau_pressure(&p, 0.1, &LandauSumSpec::default()).unwrap();
    assert!(rel(a, b) < 1e-14);
}

#[test]
fn invalid_specs_are_rejected() {
    let p = ThermoParams::new(1.0, 1.0, 0.5).with_b(0.5);
    let zero_cutoff = LandauSumSpec {
        level_cutoff: Some(0),
        ..Default::default()
    };
    assert!(matches!(landau_pressure(&p, 0.1, &zero_cutoff), Err(Error::Domain(_))));
    let bad_step = LandauSumSpec {
        fd_step: Some(-1.0),
        ..Default::default()
    };
    assert!(matches!(landau_field_derivatives(&p, 0.1, &bad_step), Err(Error::Domain(_))));
    assert!(matches!(landau_pressure(&p, -0.1, &LandauSumSpec::default()), Err(Error::Domain(_))));
}

#[test]
fn richardson_recovers_even_polynomial_curvature() {
    let d = richardson_second_derivative(|b: f64| Ok((0.3 * b).cosh()), 0.2, 3).unwrap();
    assert!((d.second - 0.09).abs() < 1e-11);
    assert!(d.first.abs() < 1e-13);
    assert_eq!(d.steps.len(), 3);
}
