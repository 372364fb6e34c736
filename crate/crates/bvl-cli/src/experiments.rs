//! The six experiments and the dispatcher [`run_experiment`].

use crate::config::{
    BoxEquivalenceSettings, ClassicalBvlSettings, ExperimentConfig, FermiTableSettings, GeometryVerifySettings,
    LandauCheckSettings, LimitStudySettings, Physics, Settings,
};
use crate::error::{CliError, CliResult, Tagged};
use crate::table::{Cell, Column, Metadata, ResultTable};
use bvl_core::classical_gas::{
    classical_free_energy_density, configuration_integral, gauge_shift_invariance_check, magnetization_analytic,
    magnetization_mc, ClassicalGasSpec, IntegrationMethod, Interaction, MomentumQuadrature,
};
use bvl_core::fermi_dirac::{f_nu_quadrature, f_nu_series, FermiOrder};
use bvl_core::geometry::{
    build_contour, build_cutoff_family, contour_fermi_check, contour_winding_check, derivative_bound_check,
    fermi_factor, green_constant_potential, holder_gap_study, partition_residuals, verify_orbital_kernel_integral,
    verify_spin_kernel_integral, KernelQuadrature,
};
use bvl_core::landau::{
    landau_field_derivatives, landau_susceptibility_zero_field, matched_fugacity, zero_field_density, LandauSumSpec,
};
use bvl_core::potentials::{CellQuadrature, PeriodicPotential};
use bvl_core::quantum_box::{
    build_hamiltonian, ensemble_equivalence_study, write_matrix_dump, BoxDiscretization, BoxFieldStep, EigenOptions,
};
use bvl_core::semiclassics::{
    remainder_slope_study, susceptibility_leading_terms, SemiclassicalModel, ThermoParams,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Process-level options that do not belong to the configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for auxiliary artifacts such as matrix dumps.
    pub out_dir: Option<PathBuf>,
    /// Progress messages on stderr.
    pub verbose: bool,
}

impl RunOptions {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[bvl] {}", msg.as_ref());
        }
    }
}

/// Columns and rows of one experiment before metadata is attached.
struct Outcome {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
    report: Option<serde_json::Value>,
}

/// Runs the configured experiment and returns its table with metadata.
///
/// The rows depend only on the configuration, seeds included; the wall time
/// and finish timestamp live in the metadata.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> CliResult<ResultTable> {
    let start = Instant::now();
    options.log(format!("running {} (config {})", config.experiment.id(), config.hash()));
    for d in &config.defaults_applied {
        options.log(format!("default {d}"));
    }
    let outcome = match &config.settings {
        Settings::LimitStudy(s) => limit_study(config, s, options)?,
        Settings::LandauCheck(s) => landau_check(config, s, options)?,
        Settings::BoxEquivalence(s) => box_equivalence(config, s, options)?,
        Settings::ClassicalBvl(s) => classical_bvl(config, s, options)?,
        Settings::GeometryVerify(s) => geometry_verify(config, s, options)?,
        Settings::FermiTable(s) => fermi_table(s)?,
    };
    let metadata = Metadata {
        experiment: config.experiment.id().into(),
        config_hash: config.hash(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        defaults_applied: config.defaults_applied.clone(),
        config: config.canonical_json(),
        report: outcome.report,
    };
    let mut table = ResultTable::new(outcome.columns, metadata);
    for row in outcome.rows {
        table.push_row(row)?;
    }
    Ok(table)
}

fn physics(config: &ExperimentConfig) -> &Physics {
    config.physics.as_ref().expect("validated config carries physics")
}

fn potential(config: &ExperimentConfig) -> CliResult<PeriodicPotential> {
    config.potential.as_ref().expect("validated config carries a potential").build().tag("potentials")
}

fn seed(config: &ExperimentConfig) -> u64 {
    config.seed.expect("validated config carries a seed")
}

/// Parameters at the given ħ; `rho` falls back to 1 where the experiment ignores it.
fn thermo(p: &Physics, hbar: f64) -> ThermoParams {
    ThermoParams::new(p.beta, p.rho.unwrap_or(1.0), hbar).with_g(p.g).with_charge(p.q, p.c)
}

fn columns(spec: &[(&str, &str)]) -> Vec<Column> {
    spec.iter().map(|(n, u)| Column::new(n, u)).collect()
}

fn limit_study(config: &ExperimentConfig, s: &LimitStudySettings, options: &RunOptions) -> CliResult<Outcome> {
    let p = physics(config);
    let v = potential(config)?;
    let quad = CellQuadrature {
        order: s.cell_order,
        tolerance: s.cell_tolerance,
        max_order: s.cell_order.max(128),
    };
    let params = thermo(p, s.hbar_grid[0]);
    let model = SemiclassicalModel::new(params, &v, &quad).tag("semiclassics")?;
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    for &h in &s.hbar_grid {
        options.log(format!("limit-study hbar = {h}"));
        let m = model.with_hbar(h).tag("semiclassics")?;
        let (z, _) = m.fugacity_fixed_point(s.tolerance, s.max_iter).tag("semiclassics")?;
        let x = m.susceptibility_at_density(s.tolerance, s.max_iter).tag("semiclassics")?;
        let lead = susceptibility_leading_terms(&params.with_hbar(h)).total;
        totals.push(x.total);
        rows.push(vec![
            h.into(),
            z.into(),
            x.orbital.into(),
            x.spin.into(),
            x.total.into(),
            lead.into(),
            (x.total / lead).into(),
            (x.total - lead).abs().into(),
        ]);
    }
    let grid = s.hbar_grid.clone();
    let fit = remainder_slope_study(&s.hbar_grid, &params, |h| {
        let i = grid.iter().position(|&g| g == h).expect("grid point");
        Ok(totals[i])
    })
    .tag("semiclassics")?;
    let mut summary = vec![Cell::from("slope")];
    summary.extend(std::iter::repeat_n(Cell::Empty, 6));
    summary.push(fit.slope.into());
    rows.push(summary);
    Ok(Outcome {
        columns: columns(&[
            ("hbar", "1"),
            ("z_bar", "1"),
            ("X_orbital", "rho*beta*hbar^2 units"),
            ("X_spin", "rho*beta*hbar^2 units"),
            ("X_total", "rho*beta*hbar^2 units"),
            ("X_leading_total", "rho*beta*hbar^2 units"),
            ("ratio", "1"),
            ("abs_gap", "rho*beta*hbar^2 units"),
        ]),
        rows,
        report: Some(json!({
            "summary_row": "last row: abs_gap column holds the log-log slope of abs_gap against hbar",
            "slope": fit.slope,
            "fit_residual": fit.residual,
        })),
    })
}

fn landau_check(config: &ExperimentConfig, s: &LandauCheckSettings, options: &RunOptions) -> CliResult<Outcome> {
    let params = thermo(physics(config), s.hbar);
    let spec = LandauSumSpec {
        level_cutoff: s.level_cutoff,
        k_quadrature: s.k_quadrature,
        fd_step: s.fd_step,
        richardson_levels: s.richardson_levels,
        tail_tolerance: s.tail_tolerance,
    };
    let z_grid = match &s.z_grid {
        Some(z) => z.clone(),
        None => vec![matched_fugacity(&params).tag("landau_free_gas")?],
    };
    let mut rows = Vec::new();
    for z in z_grid {
        options.log(format!("landau-check z = {z}"));
        let steps = landau_field_derivatives(&params, z, &spec).tag("landau_free_gas")?.steps.len();
        let x = landau_susceptibility_zero_field(&params, z, &spec).tag("landau_free_gas")?;
        let rho_z = zero_field_density(&params, z).tag("landau_free_gas")?;
        let lead = susceptibility_leading_terms(&params.with_rho(rho_z)).total;
        rows.push(vec![
            z.into(),
            steps.into(),
            x.total.into(),
            x.orbital.into(),
            x.spin.into(),
            (x.total / lead).into(),
        ]);
    }
    Ok(Outcome {
        columns: columns(&[
            ("z", "1"),
            ("b_steps_used", "count"),
            ("X_total", "(q/c)^2 d2P/db2"),
            ("X_orbital", "(q/c)^2 d2P/db2"),
            ("X_spin", "(q/c)^2 d2P/db2"),
            ("leading_ratio", "1"),
        ]),
        rows,
        report: Some(json!({
            "leading_ratio": "X_total over the leading term evaluated at the free-gas density of z",
            "field_step": spec.step(&params),
        })),
    })
}

fn box_equivalence(config: &ExperimentConfig, s: &BoxEquivalenceSettings, options: &RunOptions) -> CliResult<Outcome> {
    let params = thermo(physics(config), s.hbar);
    let v = potential(config)?;
    let eigen = EigenOptions {
        dense_limit: s.dense_limit,
        seed: seed(config),
        ..EigenOptions::default()
    };
    let step = BoxFieldStep { step: s.field_step };
    let boxes: Vec<(f64, usize)> = s.boxes.iter().map(|b| (b.side, b.points)).collect();
    options.log(format!("box-equivalence over {} boxes", boxes.len()));
    let mut dumps = Vec::new();
    if s.matrix_dump {
        let dir = options.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        for &(side, n) in &boxes {
            let grid = BoxDiscretization::new(side, n).tag("quantum_box")?;
            let params0 = params.with_b(0.0);
            let matrix = build_hamiltonian(&grid, &params0, &v).tag("quantum_box")?;
            let path = dir.join(format!("hamiltonian_L{side}_n{n}.bin"));
            write_matrix_dump(&path, &grid, &params0, &matrix)
                .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
            dumps.push(path.display().to_string());
        }
    }
    let rows_raw = ensemble_equivalence_study(&boxes, &params, &v, &step, &eigen).tag("quantum_box")?;
    let bounds: Vec<f64> = rows_raw.iter().map(|r| r.gap_bound).collect();
    let rows = rows_raw
        .iter()
        .map(|r| {
            vec![
                r.side_length.into(),
                r.points_per_side.into(),
                r.particles.into(),
                r.f_canonical.into(),
                r.p_star.into(),
                r.gap.into(),
                r.x_canonical.into(),
                r.x_gc_fixed_density.into(),
                r.x_gap.into(),
            ]
        })
        .collect();
    Ok(Outcome {
        columns: columns(&[
            ("L", "length"),
            ("n", "points per side"),
            ("N", "count"),
            ("F_canonical", "energy/volume"),
            ("P_star", "energy/volume"),
            ("gap", "energy/volume"),
            ("X_canonical", "(q/c)^2 d2/db2"),
            ("X_gc_fixed_density", "(q/c)^2 d2/db2"),
            ("X_gap", "(q/c)^2 d2/db2"),
        ]),
        rows,
        report: Some(json!({
            "gap_bound": bounds,
            "matrix_dumps": dumps,
            "matrix_dump_layout": "little-endian u64 n, f64 L, hbar, b, g, then row-major (re, im) f64 pairs",
        })),
    })
}

fn classical_bvl(config: &ExperimentConfig, s: &ClassicalBvlSettings, options: &RunOptions) -> CliResult<Outcome> {
    let p = physics(config);
    let v = potential(config)?;
    let base = seed(config);
    let mut rows = Vec::new();
    for (i, &b) in s.fields.iter().enumerate() {
        options.log(format!("classical-bvl B = {b}"));
        let spec = ClassicalGasSpec {
            particles: s.particles,
            box_side: s.box_side,
            beta: p.beta,
            b_field: b,
            hbar_planck: s.planck,
            external_potential: v.clone(),
            interaction: Interaction::None,
            charge: p.q,
            light_speed: p.c,
        };
        spec.validate().tag("classical_gas")?;
        let field_seed = base.wrapping_add(i as u64);
        let conf = configuration_integral(&spec, IntegrationMethod::default()).tag("classical_gas")?;
        let f = classical_free_energy_density(&spec).tag("classical_gas")?;
        let analytic = magnetization_analytic(&spec, s.gauge_positions, field_seed).tag("classical_gas")?;
        let (mean, se) = magnetization_mc(&spec, s.samples, field_seed).tag("classical_gas")?;
        let gauge = gauge_shift_invariance_check(&spec, &MomentumQuadrature::default(), s.gauge_positions, field_seed)
            .tag("classical_gas")?;
        rows.push(vec![
            b.into(),
            s.particles.into(),
            s.box_side.into(),
            conf.ln_value.into(),
            f.into(),
            analytic.into(),
            mean.into(),
            se.into(),
            gauge.into(),
        ]);
    }
    Ok(Outcome {
        columns: columns(&[
            ("B", "field"),
            ("N", "count"),
            ("L", "length"),
            ("ln_Z_conf", "1"),
            ("F_density", "energy/volume"),
            ("M_analytic", "moment/volume"),
            ("M_mc", "moment/volume"),
            ("M_mc_stderr", "moment/volume"),
            ("gauge_gap", "1"),
        ]),
        rows,
        report: Some(json!({ "seeds": "field i uses seed + i" })),
    })
}

fn geometry_verify(config: &ExperimentConfig, s: &GeometryVerifySettings, options: &RunOptions) -> CliResult<Outcome> {
    let p = physics(config);
    let v = potential(config)?;
    let base = seed(config);
    let family = build_cutoff_family(s.alpha, s.hbar, s.admissibility_mode()).tag("geometry")?;
    options.log(format!("geometry-verify: {} centres", family.center_count()));
    let r = partition_residuals(&family, s.partition_points);
    let mut derivative = serde_json::Map::new();
    for order in [[1, 0, 0], [2, 0, 0], [1, 1, 0]] {
        let d = derivative_bound_check(&family, order, 400).tag("geometry")?;
        derivative.insert(
            format!("{}{}{}", order[0], order[1], order[2]),
            json!({ "ratio": d.ratio, "support_constant": d.support_constant }),
        );
    }
    let holder = holder_gap_study(&v, s.alpha, &s.holder_hbar_grid, s.holder_centers, base).tag("geometry")?;

    let quad = KernelQuadrature::default();
    let xi = Complex64::new(s.kernel_xi[0], s.kernel_xi[1]);
    let h = s.kernel_hbar;
    let orbital = verify_orbital_kernel_integral(xi, 0.0, h, &quad).tag("geometry")?;
    let orbital_half = verify_orbital_kernel_integral(xi, 0.0, 0.5 * h, &quad).tag("geometry")?;
    let spin = verify_spin_kernel_integral(xi, 0.0, h, &quad).tag("geometry")?;
    let spin_half = verify_spin_kernel_integral(xi, 0.0, 0.5 * h, &quad).tag("geometry")?;
    let scaling = ((orbital.lhs / orbital_half.lhs).norm() / 8.0 - 1.0)
        .abs()
        .max(((spin.lhs / spin_half.lhs).norm() / 8.0 - 1.0).abs());

    let expected_decay = (-2.0 * xi).sqrt().re;
    let mut samples = Vec::new();
    for i in 1..=20 {
        let dist = 0.5 * i as f64;
        let g = green_constant_potential([0.0; 3], [0.0, 0.0, dist], xi, 0.0).tag("geometry")?;
        samples.push((dist, (g.norm() * dist).ln()));
    }
    let fitted_decay = -linear_slope(&samples);

    let contour = build_contour(p.beta, v.sup_norm, None, s.contour_nodes).tag("geometry")?;
    let winding_gap = (contour_winding_check(&contour, 0.0) - Complex64::new(0.0, 2.0 * PI)).norm();
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(1);
    let lo = contour.delta + 0.5;
    let hi = contour.delta + 0.5 * contour.truncation;
    let mut fermi_gap: f64 = 0.0;
    for _ in 0..s.fermi_pairs {
        let lambda = rng.random_range(lo..hi);
        let z = 10f64.powf(rng.random_range(-3.0..2.0));
        let got = contour_fermi_check(&contour, z, lambda);
        let want = fermi_factor(p.beta, z, Complex64::new(lambda, 0.0));
        fermi_gap = fermi_gap.max((got - want).norm());
    }

    let report = json!({
        "family": {
            "alpha": family.alpha,
            "hbar": family.hbar,
            "scale": family.scale,
            "max_index": family.max_index,
            "center_count": family.center_count(),
            "admissibility": s.admissibility,
        },
        "residuals": {
            "partition": r.partition,
            "hat_product": r.hat_product,
            "double_hat_product": r.double_hat_product,
            "range": [r.range.0, r.range.1],
            "derivative_bounds": derivative,
        },
        "holder": {
            "predicted_slope": holder.predicted,
            "fitted_slope": holder.slope.slope,
            "fit_residual": holder.slope.residual,
            "points": holder.slope.points,
        },
        "kernels": {
            "xi": s.kernel_xi,
            "hbar": h,
            "orbital_gap": orbital.relative_gap,
            "spin_gap": spin.relative_gap,
            "hbar_cubed_scaling_gap": scaling,
        },
        "decay": {
            "fitted": fitted_decay,
            "expected": expected_decay,
        },
        "contour": {
            "winding_gap": winding_gap,
            "max_fermi_gap": fermi_gap,
            "pairs": s.fermi_pairs,
        },
    });
    let row = vec![
        family.alpha.into(),
        family.hbar.into(),
        (family.center_count() as usize).into(),
        r.partition.into(),
        r.hat_product.into(),
        r.double_hat_product.into(),
        holder.slope.slope.into(),
        holder.predicted.into(),
        orbital.relative_gap.into(),
        spin.relative_gap.into(),
        scaling.into(),
        fitted_decay.into(),
        expected_decay.into(),
        fermi_gap.into(),
    ];
    Ok(Outcome {
        columns: columns(&[
            ("alpha", "1"),
            ("hbar", "1"),
            ("center_count", "count"),
            ("partition_residual", "1"),
            ("hat_residual", "1"),
            ("double_hat_residual", "1"),
            ("holder_slope", "1"),
            ("holder_predicted", "1"),
            ("orbital_gap", "relative"),
            ("spin_gap", "relative"),
            ("scaling_gap", "relative"),
            ("decay_fitted", "1/length"),
            ("decay_expected", "1/length"),
            ("fermi_gap", "absolute"),
        ]),
        rows: vec![row],
        report: Some(report),
    })
}

/// Least-squares slope of y against x.
fn linear_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn fermi_table(s: &FermiTableSettings) -> CliResult<Outcome> {
    let mut rows = Vec::new();
    for &nu in &s.nu {
        let order = FermiOrder::new(nu).tag("fermi_dirac")?;
        for &u in &s.u {
            let quad = f_nu_quadrature(order, u, s.tolerance).tag("fermi_dirac")?;
            let series = f_nu_series(order, u, s.terms).tag("fermi_dirac")?;
            rows.push(vec![nu.into(), u.into(), quad.into(), series.into(), (quad - series).abs().into()]);
        }
    }
    Ok(Outcome {
        columns: columns(&[
            ("nu", "1"),
            ("u", "1"),
            ("f_quadrature", "1"),
            ("f_series", "1"),
            ("abs_gap", "1"),
        ]),
        rows,
        report: None,
    })
}
