mod common;

use bvl_core::classical_gas::{
    classical_free_energy_density, configuration_integral, gauge_shift_invariance_check, ln_factorial,
    magnetization_analytic, magnetization_mc, ClassicalGasSpec, IntegrationMethod, MomentumQuadrature,
};
use bvl_core::potentials::PeriodicPotential;
use common::{periodic_trapezoid, rel};
use std::f64::consts::{LN_2, PI};

fn cosine_gas(n: usize, l: f64, b: f64) -> ClassicalGasSpec {
    ClassicalGasSpec::new(n, l, 1.0, b, PeriodicPotential::triple_cosine(0.5).unwrap()).unwrap()
}

/// Cell average of e^{−βa cos 2πx}, so the cell integral of e^{−βaΣcos} is its cube.
fn cosine_cell_average(beta_a: f64) -> f64 {
    periodic_trapezoid(64, |x| (-beta_a * (2.0 * PI * x).cos()).exp())
}

#[test]
fn free_gas_configuration_integral() {
    for (n, l) in [(1, 1.0), (5, 2.5), (12, 3.0)] {
        let spec = ClassicalGasSpec::new(n, l, 0.7, 1.0, PeriodicPotential::zero()).unwrap();
        let c = configuration_integral(&spec, IntegrationMethod::default()).unwrap();
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let expected = (l.powi(3 * n as i32) / factorial).ln();
        assert!((c.ln_value - expected).abs() <= 1e-12 * expected.abs().max(1.0), "n={n} l={l}");
        assert_eq!(c.standard_error, 0.0);
    }
}

#[test]
fn periodic_potential_integral_is_cell_multiple() {
    for l in [1.0, 2.0, 3.0] {
        let spec = cosine_gas(1, l, 1.0);
        let c = configuration_integral(&spec, IntegrationMethod::default()).unwrap();
        let expected = l.powi(3) * cosine_cell_average(0.5).powi(3);
        assert!(rel(c.single_particle, expected) <= 1e-12, "l={l}");
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let spec = cosine_gas(3, 4.0, 1.0);
    let quad = configuration_integral(&spec, IntegrationMethod::default()).unwrap();
    for seed in [1, 2, 3] {
        let mc = configuration_integral(&spec, IntegrationMethod::MonteCarlo { samples: 200_000, seed }).unwrap();
        assert!(mc.standard_error > 0.0);
        assert!((mc.single_particle - quad.single_particle).abs() <= 3.0 * mc.standard_error, "seed {seed}");
    }
}

#[test]
fn free_energy_of_small_free_gas() {
    let spec = ClassicalGasSpec::new(8, 2.0, 1.0, 3.0, PeriodicPotential::zero()).unwrap();
    let f = classical_free_energy_density(&spec).unwrap();
    let expected = -(8.0f64).recip() * ((2.0 * PI).powi(-12) * 2f64.powi(24) / 40320.0).ln();
    assert!((f - expected).abs() <= 1e-12 * expected.abs());
}

#[test]
fn doubling_wavelength_shifts_free_energy() {
    let spec = cosine_gas(6, 2.0, 1.0);
    let base = classical_free_energy_density(&spec).unwrap();
    let doubled = ClassicalGasSpec {
        hbar_planck: 2.0 * spec.hbar_planck,
        ..spec.clone()
    };
    assert!((doubled.thermal_wavelength() - 2.0 * spec.thermal_wavelength()).abs() < 1e-15);
    let rho = 6.0 / 8.0;
    let shift = classical_free_energy_density(&doubled).unwrap() - base;
    assert!((shift - 3.0 * rho * LN_2 / spec.beta).abs() < 1e-13);
}

#[test]
fn free_energy_ignores_the_field() {
    let spec = cosine_gas(4, 2.0, 1.0);
    let a = classical_free_energy_density(&spec).unwrap();
    for b in [0.0, 5.0, -20.0] {
        assert_eq!(classical_free_energy_density(&spec.with_field(b)).unwrap(), a);
    }
}

#[test]
fn configuration_integral_factorizes() {
    for n in [2, 5, 9] {
        let big = configuration_integral(&cosine_gas(n, 3.0, 1.0), IntegrationMethod::default()).unwrap();
        let small = configuration_integral(&cosine_gas(n - 1, 3.0, 1.0), IntegrationMethod::default()).unwrap();
        let step = (big.single_particle / n as f64).ln();
        assert!((big.ln_value - small.ln_value - step).abs() < 1e-12);
    }
    assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-12);
    assert_eq!(ln_factorial(0), 0.0);
}

#[test]
fn magnetization_passes_three_sigma_for_two_fields() {
    for b in [1.0, 5.0] {
        let spec = cosine_gas(4, 4.0, b);
        let (mean, se) = magnetization_mc(&spec, 20_000, 42).unwrap();
        assert!(se > 0.0);
        assert!(mean.abs() <= 3.0 * se, "b={b}: {mean} +- {se}");
        assert_eq!(magnetization_analytic(&spec, 500, 42).unwrap(), 0.0);
    }
}

#[test]
fn magnetization_is_reproducible_from_seed() {
    let spec = cosine_gas(2, 3.0, 2.0);
    assert_eq!(magnetization_mc(&spec, 5000, 9).unwrap(), magnetization_mc(&spec, 5000, 9).unwrap());
    assert_ne!(magnetization_mc(&spec, 5000, 9).unwrap(), magnetization_mc(&spec, 5000, 10).unwrap());
}

#[test]
fn magnetization_estimator_is_unbiased_over_seeds() {
    let spec = cosine_gas(3, 4.0, 1.0);
    let runs: Vec<(f64, f64)> = (0..20).map(|seed| magnetization_mc(&spec, 10_000, 1000 + seed).unwrap()).collect();
    let grand = runs.iter().map(|r| r.0).sum::<f64>() / 20.0;
    let sigma = (runs.iter().map(|r| r.1 * r.1).sum::<f64>() / 20.0).sqrt();
    assert!(grand.abs() <= 3.0 * sigma / 20f64.sqrt(), "{grand} vs {sigma}");
}

#[test]
fn magnetization_rejects_small_budgets() {
    let spec = cosine_gas(2, 2.0, 1.0);
    assert!(magnetization_mc(&spec, 999, 1).is_err());
    assert!(magnetization_mc(&spec.with_field(0.0), 5000, 1).is_err());
}

#[test]
fn gauge_shift_leaves_momentum_integral_unchanged() {
    let quad = MomentumQuadrature::default();
    let one = gauge_shift_invariance_check(&cosine_gas(1, 4.0, 1.0), &quad, 1, 5).unwrap();
    assert!(one <= 1e-12);
    let many = gauge_shift_invariance_check(&cosine_gas(1, 4.0, 1.0), &quad, 100, 6).unwrap();
    assert!(many <= 1e-12);
    let strong = gauge_shift_invariance_check(&cosine_gas(1, 4.0, 50.0), &quad, 100, 7).unwrap();
    assert!(strong <= 1e-12);
    let zero = gauge_shift_invariance_check(&cosine_gas(1, 4.0, 0.0), &quad, 100, 8).unwrap();
    assert_eq!(zero, 0.0);
}

#[test]
fn spec_validation_reports_every_problem() {
    let mut spec = cosine_gas(1, 1.0, 1.0);
    spec.particles = 0;
    spec.box_side = 0.0;
    spec.beta = -1.0;
    let message = spec.validate().unwrap_err().to_string();
    for word in ["N must", "box side", "beta"] {
        assert!(message.contains(word), "{message}");
    }
}
