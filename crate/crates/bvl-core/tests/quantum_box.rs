mod common;

use bvl_core::landau::{landau_susceptibility_zero_field, matched_fugacity, LandauSumSpec};
use bvl_core::potentials::PeriodicPotential;
use bvl_core::quantum_box::{
    box_spectrum, box_susceptibilities, build_hamiltonian, canonical_partition_contour, canonical_partition_product,
    canonical_partition_recursive, darwin_fowler_report, ensemble_equivalence_study, gc_density_fv, gc_pressure_fv,
    legendre_pressure, spectrum_lower_bound, write_matrix_dump, BoxDiscretization, BoxFieldStep, EigenOptions,
    SpectrumMethod, Spectrum,
};
use bvl_core::semiclassics::ThermoParams;
use bvl_core::Error;
use common::rel;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

/// A potential that couples x₁ and x₃, so no separable route applies.
fn coupled() -> PeriodicPotential {
    PeriodicPotential::custom(
        "coupled",
        Arc::new(|x: [f64; 3]| 0.4 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[2]).cos() + 0.2 * (2.0 * PI * x[1]).sin()),
        1.0,
        0.8 * PI,
        0.6,
    )
    .unwrap()
}

fn levels(values: &[f64]) -> Spectrum {
    Spectrum::from_levels(values.to_vec(), 1.0).unwrap()
}

/// Every subset of `values` with its size and summed energy.
fn subsets(values: &[f64]) -> Vec<(usize, f64)> {
    (0u32..(1 << values.len()))
        .map(|mask| {
            let mut energy = 0.0;
            for (j, v) in values.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    energy += v;
                }
            }
            (mask.count_ones() as usize, energy)
        })
        .collect()
}

const SIX: [f64; 6] = [0.0, 0.3, 0.7, 1.1, 1.6, 2.2];
const TWELVE: [f64; 12] = [-0.4, 0.0, 0.1, 0.35, 0.5, 0.8, 0.9, 1.3, 1.7, 2.0, 2.6, 3.1];

#[test]
fn hamiltonian_is_hermitian_and_real_at_zero_field() {
    let grid = BoxDiscretization::new(2.0, 5).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 0.7);
    let h = build_hamiltonian(&grid, &p.with_b(1.3), &coupled()).unwrap();
    assert_eq!(h, h.adjoint());
    assert!(h.iter().any(|z| z.im != 0.0));
    let h0 = build_hamiltonian(&grid, &p, &coupled()).unwrap();
    assert!(h0.iter().all(|z| z.im == 0.0));
    assert_eq!(h0, h0.transpose());
}

#[test]
fn matrix_budget_is_enforced() {
    let grid = BoxDiscretization::new(1.0, 40).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 1.0);
    let options = EigenOptions {
        force: Some(SpectrumMethod::Dense),
        matrix_budget: 1 << 20,
        ..Default::default()
    };
    assert!(matches!(box_spectrum(&grid, &p, &coupled(), &options), Err(Error::Resource(_))));
    assert!(BoxDiscretization::new(1.0, 3).is_err());
    assert!(BoxDiscretization::new(-1.0, 8).is_err());
}

#[test]
fn free_box_levels_approach_dirichlet_laplacian() {
    let grid = BoxDiscretization::new(1.0, 24).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 1.0);
    let s = box_spectrum(&grid, &p, &PeriodicPotential::zero(), &EigenOptions::default()).unwrap();
    assert_eq!(s.method, SpectrumMethod::Separable);
    assert_eq!(s.count(), 24usize.pow(3));
    assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    let exact = 3.0 * PI * PI / 2.0;
    assert!(rel(s.ground(), exact) <= 2e-2);
    let excited = 6.0 * PI * PI / 2.0;
    for level in &s.eigenvalues[1..4] {
        assert!(rel(*level, excited) <= 3e-2);
    }
}

#[test]
fn separable_route_matches_dense_solve() {
    let grid = BoxDiscretization::new(2.0, 8).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 0.6).with_b(0.9);
    let v = PeriodicPotential::triple_cosine(0.5).unwrap();
    let sep = box_spectrum(&grid, &p, &v, &EigenOptions::default()).unwrap();
    let dense = box_spectrum(
        &grid,
        &p,
        &v,
        &EigenOptions {
            force: Some(SpectrumMethod::Dense),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(sep.method, SpectrumMethod::Separable);
    for (a, b) in sep.eigenvalues.iter().zip(&dense.eigenvalues) {
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}

#[test]
fn lanczos_matches_dense_below_window() {
    let grid = BoxDiscretization::new(1.5, 8).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 0.4).with_b(0.7);
    let dense = box_spectrum(&grid, &p, &coupled(), &EigenOptions::default()).unwrap();
    assert_eq!(dense.method, SpectrumMethod::Dense);
    let options = EigenOptions {
        force: Some(SpectrumMethod::Lanczos),
        lanczos_window: Some(3.0),
        ..Default::default()
    };
    let lanczos = box_spectrum(&grid, &p, &coupled(), &options).unwrap();
    let cut = dense.ground() + 3.0;
    let expected: Vec<f64> = dense.eigenvalues.iter().copied().filter(|&l| l < cut).collect();
    assert!(lanczos.count() >= expected.len());
    for (a, b) in lanczos.eigenvalues.iter().zip(&expected) {
        assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
    }
    assert_eq!(lanczos.missing_levels, grid.dimension() - lanczos.count());
    assert!(dense.eigenvalues[lanczos.count()..].iter().all(|&l| l >= lanczos.tail_floor - 1e-8));
}

#[test]
fn spectrum_is_even_in_field_at_zero_g() {
    let p = ThermoParams::new(1.0, 1.0, 0.5).with_g(0.0);
    let grid = BoxDiscretization::new(2.0, 6).unwrap();
    for v in [coupled(), PeriodicPotential::triple_cosine(0.3).unwrap()] {
        let plus = box_spectrum(&grid, &p.with_b(1.7), &v, &EigenOptions::default()).unwrap();
        let minus = box_spectrum(&grid, &p.with_b(-1.7), &v, &EigenOptions::default()).unwrap();
        for (a, b) in plus.eigenvalues.iter().zip(&minus.eigenvalues) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }
}

#[test]
fn ground_state_respects_lower_bound_with_shrinking_slack() {
    let p = ThermoParams::new(1.0, 1.0, 1.0).with_b(8.0);
    let v = PeriodicPotential::zero();
    let bound = spectrum_lower_bound(&p, &v);
    let mut slacks = Vec::new();
    for n in [12, 16, 20] {
        let grid = BoxDiscretization::new(6.0, n).unwrap();
        let union = box_spectrum(&grid, &p.with_g(0.0), &v, &EigenOptions::default())
            .unwrap()
            .spin_union(p.g);
        slacks.push((bound - union.ground()).max(0.0));
    }
    assert!(slacks.windows(2).all(|w| w[1] < w[0]), "{slacks:?}");
}

#[test]
fn spin_union_shifts_each_level() {
    let grid = BoxDiscretization::new(2.0, 5).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 0.5).with_b(2.0).with_g(0.0);
    let orbital = box_spectrum(&grid, &p, &PeriodicPotential::zero(), &EigenOptions::default()).unwrap();
    let union = orbital.spin_union(2.0);
    assert_eq!(union.count(), 2 * orbital.count());
    let shift = 2.0 * 0.5 * 2.0 / 4.0;
    assert!((union.ground() - (orbital.ground() - shift)).abs() < 1e-14);
    assert!(union.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn grand_canonical_pressure_examples() {
    let empty = Spectrum::from_levels(vec![], 1.0).unwrap();
    assert_eq!(gc_pressure_fv(&empty, 1.0, 0.5).unwrap(), 0.0);
    assert!((gc_pressure_fv(&levels(&[0.0]), 1.0, 1.0).unwrap() - LN_2).abs() < 1e-15);
    for (beta, z) in [(1.0f64, 0.3f64), (2.5, 4.0)] {
        let xi: f64 = subsets(&TWELVE)
            .iter()
            .map(|&(k, e)| z.powi(k as i32) * (-beta * e).exp())
            .sum();
        let got = gc_pressure_fv(&levels(&TWELVE), beta, z).unwrap();
        assert!(rel(got, xi.ln() / beta) < 1e-13);
    }
    assert!(gc_pressure_fv(&levels(&TWELVE), 1.0, -1.0).is_err());
}

#[test]
fn pressure_is_convex_in_chemical_potential() {
    let s = levels(&TWELVE);
    let beta = 1.3;
    let p = |mu: f64| gc_pressure_fv(&s, beta, (beta * mu).exp()).unwrap();
    for mu in [-2.0, -0.5, 0.4, 1.2, 3.0] {
        let d = 0.1;
        assert!(p(mu + d) + p(mu - d) - 2.0 * p(mu) > 0.0);
    }
}

#[test]
fn grand_canonical_density_examples() {
    let s = levels(&TWELVE);
    let beta = 0.8;
    let boltzmann: f64 = TWELVE.iter().map(|l| (-beta * l).exp()).sum();
    let z = 1e-9;
    assert!(rel(gc_density_fv(&s, beta, z).unwrap() / z, boltzmann) < 1e-8);
    for z in [0.2, 1.5, 7.0] {
        let eps = 1e-4;
        let derivative = (gc_pressure_fv(&s, beta, z * (1.0 + eps)).unwrap()
            - gc_pressure_fv(&s, beta, z * (1.0 - eps)).unwrap())
            / (2.0 * eps * z);
        assert!(rel(beta * z * derivative, gc_density_fv(&s, beta, z).unwrap()) < 1e-7);
    }
    let saturated = gc_density_fv(&s, 1.0, 1e9).unwrap();
    assert!(saturated > 11.99 && saturated <= 12.0);
    let mut last = 0.0;
    for z in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let d = gc_density_fv(&s, beta, z).unwrap();
        assert!(d > last);
        last = d;
    }
}

#[test]
fn recursion_examples() {
    let beta = 1.0;
    let s = levels(&SIX);
    let one: f64 = SIX.iter().map(|l| (-beta * l).exp()).sum();
    assert!((canonical_partition_recursive(&s, 1, beta).unwrap() - one.ln()).abs() < 1e-14);
    let three: f64 = subsets(&SIX)
        .iter()
        .filter(|&&(k, _)| k == 3)
        .map(|&(_, e)| (-beta * e).exp())
        .sum();
    assert_eq!(subsets(&SIX).iter().filter(|&&(k, _)| k == 3).count(), 20);
    let got = canonical_partition_recursive(&s, 3, beta).unwrap().exp();
    assert!(rel(got, three) <= 1e-12);
    let full: f64 = SIX.iter().sum();
    let all = canonical_partition_recursive(&s, 6, beta).unwrap();
    assert!((all + beta * full).abs() < 1e-12);
    assert_eq!(canonical_partition_recursive(&s, 0, beta).unwrap(), 0.0);
    assert!(matches!(canonical_partition_recursive(&s, 7, beta), Err(Error::Domain(_))));
}

#[test]
fn recursion_and_product_match_enumeration_up_to_six_particles() {
    let s = levels(&TWELVE);
    let all = subsets(&TWELVE);
    for beta in [0.5, 1.0, 2.0] {
        for n in 1..=6 {
            let exact: f64 = all
                .iter()
                .filter(|&&(k, _)| k == n)
                .map(|&(_, e)| (-beta * e).exp())
                .sum();
            let rec = canonical_partition_recursive(&s, n, beta).unwrap().exp();
            let prod = canonical_partition_product(&s, n, beta).unwrap().exp();
            assert!(rel(rec, exact) <= 1e-12, "beta={beta} n={n}");
            assert!(rel(prod, exact) <= 1e-12, "beta={beta} n={n}");
        }
    }
}

#[test]
fn recursion_reports_cancellation_at_low_temperature() {
    let spread: Vec<f64> = (0..60).map(|j| j as f64 * 0.05).collect();
    let s = levels(&spread);
    let result = canonical_partition_recursive(&s, 40, 20.0);
    assert!(matches!(result, Err(Error::Numeric(_))), "{result:?}");
    assert!(canonical_partition_product(&s, 40, 20.0).is_ok());
}

#[test]
fn contour_examples() {
    let s = levels(&SIX);
    let c = canonical_partition_contour(&s, 3, 1.0, None, 128).unwrap();
    let rec = canonical_partition_recursive(&s, 3, 1.0).unwrap();
    assert!(rel(c.ln_z.exp(), rec.exp()) <= 1e-8);
    assert!(!c.flagged);
    let zero = canonical_partition_contour(&s, 0, 1.0, Some(0.7), 64).unwrap();
    assert!(zero.ln_z.abs() < 1e-12);
    let halved = canonical_partition_contour(&s, 3, 1.0, Some(0.5 * c.radius), 128).unwrap();
    assert!(rel(halved.ln_z.exp(), c.ln_z.exp()) <= 1e-8);
    assert!(canonical_partition_contour(&s, 3, 1.0, Some(-1.0), 128).is_err());
    assert!(canonical_partition_contour(&s, 3, 1.0, None, 32).is_err());
}

#[test]
fn legendre_examples() {
    let one = levels(&[0.0]);
    let r = legendre_pressure(&one, 1.0, 0.5).unwrap();
    assert!((r.z_bar - 1.0).abs() < 1e-12);
    assert!((r.p_star + LN_2).abs() < 1e-12);
    let s = levels(&TWELVE);
    let rhos = [1.0, 2.0, 3.0, 4.0, 5.0];
    let p: Vec<f64> = rhos.iter().map(|&r| legendre_pressure(&s, 1.0, r).unwrap().p_star).collect();
    for w in p.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] > 0.0, "{p:?}");
    }
    assert!(matches!(legendre_pressure(&s, 1.0, 12.0), Err(Error::Domain(_))));
    assert!(matches!(legendre_pressure(&s, 1.0, 0.0), Err(Error::Domain(_))));
}

#[test]
fn legendre_value_is_the_supremum() {
    let s = levels(&TWELVE);
    let (beta, rho) = (1.2, 3.5);
    let r = legendre_pressure(&s, beta, rho).unwrap();
    for mu in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let value = rho * mu - gc_pressure_fv(&s, beta, (beta * mu).exp()).unwrap();
        assert!(value <= r.p_star + 1e-12);
    }
}

#[test]
fn darwin_fowler_gap_shrinks_with_box() {
    let p = ThermoParams::new(1.0, 1.0, 1.0);
    let mut gaps = Vec::new();
    for (side, n) in [(2.0, 8), (3.0, 12), (4.0, 16)] {
        let grid = BoxDiscretization::new(side, n).unwrap();
        let union = box_spectrum(&grid, &p.with_g(0.0), &PeriodicPotential::zero(), &EigenOptions::default())
            .unwrap()
            .spin_union(0.0);
        let particles = (p.rho * grid.volume()).round() as usize;
        let df = darwin_fowler_report(&union, p.beta, particles).unwrap();
        assert!(df.gap.abs() <= df.bound);
        assert!((df.gap - (df.log_term - df.ln_a_exact / (p.beta * grid.volume()))).abs() < 1e-12);
        gaps.push(df.gap.abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

fn free_box(side: f64, n: usize, rho: f64) -> (BoxDiscretization, ThermoParams, usize) {
    let grid = BoxDiscretization::new(side, n).unwrap();
    let particles = (rho * grid.volume()).round() as usize;
    (grid, ThermoParams::new(1.0, rho, 1.0), particles)
}

#[test]
fn canonical_susceptibility_signs_and_magnetization() {
    let (grid, p, particles) = free_box(4.0, 10, 1.0 / 16.0);
    let v = PeriodicPotential::triple_cosine(0.3).unwrap();
    let s = box_susceptibilities(&grid, &p, &v, particles, &BoxFieldStep::default(), &EigenOptions::default()).unwrap();
    assert!(s.canonical.orbital < 0.0 && s.canonical.spin > 0.0);
    assert!(s.grand_canonical.orbital < 0.0 && s.grand_canonical.spin > 0.0);
    assert!(s.magnetization.abs() <= 1e-8 * s.canonical.total.abs() * s.step);
    assert_eq!(s.step, BoxFieldStep::default().resolve(&grid, &p));
}

#[test]
fn dilute_free_box_approaches_landau_value() {
    let rho = 1.0 / 64.0;
    let bulk = ThermoParams::new(1.0, rho, 1.0);
    let z = matched_fugacity(&bulk).unwrap();
    let landau = landau_susceptibility_zero_field(&bulk, z, &LandauSumSpec::default()).unwrap().total;
    let mut gaps = Vec::new();
    for (side, n) in [(4.0, 16), (8.0, 24), (8.0, 32)] {
        let (grid, p, particles) = free_box(side, n, rho);
        let s = box_susceptibilities(&grid, &p, &PeriodicPotential::zero(), particles, &BoxFieldStep::default(), &EigenOptions::default())
            .unwrap();
        let ratio = s.canonical.total / (rho * p.beta * p.hbar * p.hbar);
        if n == 16 {
            assert!(rel(ratio, 1.0 / 6.0) <= 0.25, "ratio {ratio}");
        }
        gaps.push(rel(s.canonical.total, landau));
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn equivalence_study_rejects_fractional_particle_numbers() {
    let p = ThermoParams::new(1.0, 0.3, 1.0);
    let result = ensemble_equivalence_study(&[(2.0, 8)], &p, &PeriodicPotential::zero(), &BoxFieldStep::default(), &EigenOptions::default());
    assert!(matches!(result, Err(Error::Domain(_))));
}

#[test]
fn equivalence_study_gap_decreases() {
    let p = ThermoParams::new(1.0, 1.0, 1.0);
    let rows = ensemble_equivalence_study(
        &[(2.0, 8), (3.0, 12), (4.0, 16)],
        &p,
        &PeriodicPotential::zero(),
        &BoxFieldStep::default(),
        &EigenOptions::default(),
    )
    .unwrap();
    assert_eq!(rows.iter().map(|r| r.particles).collect::<Vec<_>>(), vec![8, 27, 64]);
    assert!(rows.windows(2).all(|w| w[1].x_gap < w[0].x_gap));
    assert!(rows.iter().all(|r| r.gap <= r.gap_bound));
}

#[test]
fn matrix_dump_layout() {
    let grid = BoxDiscretization::new(1.5, 4).unwrap();
    let p = ThermoParams::new(1.0, 1.0, 0.8).with_b(0.6);
    let h = build_hamiltonian(&grid, &p, &coupled()).unwrap();
    let path = std::env::temp_dir().join(format!("bvl-dump-{}.bin", std::process::id()));
    write_matrix_dump(&path, &grid, &p, &h).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let dim = grid.dimension();
    assert_eq!(bytes.len(), 8 + 4 * 8 + dim * dim * 16);
    let word = |i: usize| <[u8; 8]>::try_from(&bytes[i..i + 8]).unwrap();
    assert_eq!(u64::from_le_bytes(word(0)), 4);
    assert_eq!(f64::from_le_bytes(word(8)), 1.5);
    assert_eq!(f64::from_le_bytes(word(16)), 0.8);
    assert_eq!(f64::from_le_bytes(word(24)), 0.6);
    assert_eq!(f64::from_le_bytes(word(32)), 2.0);
    let (r, c) = (3, 7);
    let at = 40 + (r * dim + c) * 16;
    assert_eq!(f64::from_le_bytes(word(at)), h[(r, c)].re);
    assert_eq!(f64::from_le_bytes(word(at + 8)), h[(r, c)].im);
}
