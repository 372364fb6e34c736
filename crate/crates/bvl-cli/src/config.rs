//! Experiment configuration: a TOML document validated into [`ExperimentConfig`].
//!
//! Validation is exhaustive rather than fail-fast. Every missing, malformed or
//! out-of-range field is reported, and every default that was filled in is
//! listed in [`ExperimentConfig::defaults_applied`].

use crate::error::{CliError, CliResult};
use bvl_core::fermi_dirac::FermiOrder;
use bvl_core::geometry::Admissibility;
use bvl_core::potentials::PeriodicPotential;
use bvl_core::semiclassics::{DEFAULT_FIXED_POINT_ITER, DEFAULT_FIXED_POINT_TOL};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Debug;
use std::str::FromStr;

/// The experiments the driver can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LimitStudy,
    LandauCheck,
    BoxEquivalence,
    ClassicalBvl,
    GeometryVerify,
    FermiTable,
}

impl Experiment {
    /// All experiments in documentation order.
    pub const ALL: [Experiment; 6] = [
        Experiment::LimitStudy,
        Experiment::LandauCheck,
        Experiment::BoxEquivalence,
        Experiment::ClassicalBvl,
        Experiment::GeometryVerify,
        Experiment::FermiTable,
    ];

    /// Identifier used in configs and file names.
    pub fn id(self) -> &'static str {
        match self {
            Experiment::LimitStudy => "limit-study",
            Experiment::LandauCheck => "landau-check",
            Experiment::BoxEquivalence => "box-equivalence",
            Experiment::ClassicalBvl => "classical-bvl",
            Experiment::GeometryVerify => "geometry-verify",
            Experiment::FermiTable => "fermi-table",
        }
    }

    /// Name of the experiment's own config section.
    pub fn section(self) -> &'static str {
        match self {
            Experiment::LimitStudy => "limit_study",
            Experiment::LandauCheck => "landau_check",
            Experiment::BoxEquivalence => "box_equivalence",
            Experiment::ClassicalBvl => "classical_bvl",
            Experiment::GeometryVerify => "geometry_verify",
            Experiment::FermiTable => "fermi_table",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL.into_iter().find(|e| e.id() == s).ok_or_else(|| {
            let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.id()).collect();
            format!("unknown experiment '{s}' (expected one of {})", known.join(", "))
        })
    }
}

/// Physical parameters shared by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Physics {
    pub beta: f64,
    /// Total density; absent when the experiment does not use it.
    pub rho: Option<f64>,
    pub g: f64,
    pub q: f64,
    pub c: f64,
}

/// A library potential by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialConfig {
    pub name: String,
    pub params: Vec<f64>,
}

impl PotentialConfig {
    /// Builds the potential; names and arity were checked during validation.
    pub fn build(&self) -> bvl_core::Result<PeriodicPotential> {
        PeriodicPotential::from_name(&self.name, &self.params)
    }
}

/// Settings of `limit-study`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitStudySettings {
    /// Strictly decreasing ħ values, at least three.
    pub hbar_grid: Vec<f64>,
    pub tolerance: f64,
    pub max_iter: usize,
    pub cell_order: usize,
    pub cell_tolerance: f64,
}

/// Settings of `landau-check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauCheckSettings {
    pub hbar: f64,
    /// Fugacities; `None` uses the fugacity matched to ρ.
    pub z_grid: Option<Vec<f64>>,
    pub richardson_levels: usize,
    pub fd_step: Option<f64>,
    pub k_quadrature: usize,
    pub level_cutoff: Option<usize>,
    pub tail_tolerance: f64,
}

/// One box of `box-equivalence`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSize {
    pub side: f64,
    pub points: usize,
}

/// Settings of `box-equivalence`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxEquivalenceSettings {
    pub hbar: f64,
    pub boxes: Vec<BoxSize>,
    pub field_step: Option<f64>,
    pub dense_limit: usize,
    pub matrix_dump: bool,
}

/// Settings of `classical-bvl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalBvlSettings {
    pub particles: usize,
    pub box_side: f64,
    /// Field strengths B, all non-zero.
    pub fields: Vec<f64>,
    pub samples: usize,
    pub planck: f64,
    pub gauge_positions: usize,
}

/// Settings of `geometry-verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryVerifySettings {
    pub alpha: f64,
    pub hbar: f64,
    /// "strict" or "relaxed".
    pub admissibility: String,
    pub partition_points: usize,
    pub holder_hbar_grid: Vec<f64>,
    pub holder_centers: usize,
    /// Spectral parameter ξ as [re, im].
    pub kernel_xi: [f64; 2],
    pub kernel_hbar: f64,
    pub contour_nodes: usize,
    pub fermi_pairs: usize,
}

impl GeometryVerifySettings {
    /// Parsed admissibility mode.
    pub fn admissibility_mode(&self) -> Admissibility {
        if self.admissibility == "relaxed" {
            Admissibility::Relaxed
        } else {
            Admissibility::Strict
        }
    }
}

/// Settings of `fermi-table`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FermiTableSettings {
    pub nu: Vec<f64>,
    pub u: Vec<f64>,
    pub terms: usize,
    pub tolerance: f64,
}

/// Experiment-specific settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Settings {
    LimitStudy(LimitStudySettings),
    LandauCheck(LandauCheckSettings),
    BoxEquivalence(BoxEquivalenceSettings),
    ClassicalBvl(ClassicalBvlSettings),
    GeometryVerify(GeometryVerifySettings),
    FermiTable(FermiTableSettings),
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Master seed; present for every experiment that draws random numbers.
    pub seed: Option<u64>,
    pub physics: Option<Physics>,
    pub potential: Option<PotentialConfig>,
    pub settings: Settings,
    pub output_dir: Option<String>,
    /// Defaults filled in during validation, as `field = value`.
    #[serde(skip)]
    pub defaults_applied: Vec<String>,
}

impl ExperimentConfig {
    /// Canonical JSON of the effective configuration with keys sorted.
    pub fn canonical_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, in hex.
    ///
    /// The hash depends on the effective values only, so reordering fields in
    /// the source document or spelling out a default leaves it unchanged.
    pub fn hash(&self) -> String {
        let text = self.canonical_json().to_string();
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    /// Replaces the seed, as `--seed-override` does.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    seed: Option<u64>,
    physics: Option<RawPhysics>,
    potential: Option<RawPotential>,
    output: Option<RawOutput>,
    limit_study: Option<RawLimitStudy>,
    landau_check: Option<RawLandauCheck>,
    box_equivalence: Option<RawBoxEquivalence>,
    classical_bvl: Option<RawClassicalBvl>,
    geometry_verify: Option<RawGeometryVerify>,
    fermi_table: Option<RawFermiTable>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    beta: Option<f64>,
    rho: Option<f64>,
    g: Option<f64>,
    q: Option<f64>,
    c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    name: Option<String>,
    params: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimitStudy {
    hbar_grid: Option<Vec<f64>>,
    tolerance: Option<f64>,
    max_iter: Option<usize>,
    cell_order: Option<usize>,
    cell_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLandauCheck {
    hbar: Option<f64>,
    z_grid: Option<Vec<f64>>,
    richardson_levels: Option<usize>,
    fd_step: Option<f64>,
    k_quadrature: Option<usize>,
    level_cutoff: Option<usize>,
    tail_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoxEquivalence {
    hbar: Option<f64>,
    boxes: Option<Vec<BoxSize>>,
    field_step: Option<f64>,
    dense_limit: Option<usize>,
    matrix_dump: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassicalBvl {
    particles: Option<usize>,
    box_side: Option<f64>,
    fields: Option<Vec<f64>>,
    samples: Option<usize>,
    planck: Option<f64>,
    gauge_positions: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometryVerify {
    alpha: Option<f64>,
    hbar: Option<f64>,
    admissibility: Option<String>,
    partition_points: Option<usize>,
    holder_hbar_grid: Option<Vec<f64>>,
    holder_centers: Option<usize>,
    kernel_xi: Option<[f64; 2]>,
    kernel_hbar: Option<f64>,
    contour_nodes: Option<usize>,
    fermi_pairs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFermiTable {
    nu: Option<Vec<f64>>,
    u: Option<Vec<f64>>,
    terms: Option<usize>,
    tolerance: Option<f64>,
}

/// Error and default bookkeeping during validation.
#[derive(Default)]
struct Checker {
    errors: Vec<String>,
    defaults: Vec<String>,
}

impl Checker {
    fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn required<T>(&mut self, field: &str, value: Option<T>) -> Option<T> {
        if value.is_none() {
            self.error(format!("missing required field `{field}`"));
        }
        value
    }

    fn or_default<T: Debug>(&mut self, field: &str, value: Option<T>, default: T) -> T {
        value.unwrap_or_else(|| {
            self.defaults.push(format!("{field} = {default:?}"));
            default
        })
    }

    fn positive(&mut self, field: &str, value: Option<f64>) -> Option<f64> {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                self.error(format!("`{field}` must be positive and finite, got {v}"));
            }
        }
        value
    }

    fn at_least(&mut self, field: &str, value: usize, min: usize) -> usize {
        if value < min {
            self.error(format!("`{field}` must be at least {min}, got {value}"));
        }
        value
    }

    fn nonempty(&mut self, field: &str, values: &[f64]) {
        if values.is_empty() {
            self.error(format!("`{field}` must not be empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            self.error(format!("`{field}` contains a non-finite value {v}"));
        }
    }

    fn decreasing_hbar(&mut self, field: &str, grid: &[f64], min_len: usize) {
        if grid.len() < min_len {
            self.error(format!("`{field}` needs at least {min_len} values, got {}", grid.len()));
        }
        if grid.windows(2).any(|w| !(w[1] < w[0])) {
            self.error(format!("`{field}` must be strictly decreasing, got {grid:?}"));
        }
        if let Some(h) = grid.iter().find(|&&h| !(h > 0.0 && h <= 1.0)) {
            self.error(format!("`{field}` values must lie in (0, 1], got {h}"));
        }
    }

    fn seed(&mut self, experiment: Experiment, seed: Option<u64>) -> Option<u64> {
        if seed.is_none() {
            self.error(format!("missing required field `seed` (experiment {} draws random numbers)", experiment.id()));
        }
        seed
    }
}

/// Parses and validates a TOML document, collecting every problem.
pub fn validate_config(raw: &str) -> CliResult<ExperimentConfig> {
    let parsed: RawConfig = toml::from_str(raw).map_err(|e| CliError::Config(vec![e.message().to_string()]))?;
    let mut ck = Checker::default();
    let experiment = match ck.required("experiment", parsed.experiment.as_deref()).map(Experiment::from_str) {
        Some(Ok(e)) => Some(e),
        Some(Err(msg)) => {
            ck.error(msg);
            None
        }
        None => None,
    };
    let Some(experiment) = experiment else {
        return Err(CliError::Config(ck.errors));
    };

    let present = [
        (Experiment::LimitStudy, parsed.limit_study.is_some()),
        (Experiment::LandauCheck, parsed.landau_check.is_some()),
        (Experiment::BoxEquivalence, parsed.box_equivalence.is_some()),
        (Experiment::ClassicalBvl, parsed.classical_bvl.is_some()),
        (Experiment::GeometryVerify, parsed.geometry_verify.is_some()),
        (Experiment::FermiTable, parsed.fermi_table.is_some()),
    ];
    for (other, is_present) in present {
        if is_present && other != experiment {
            ck.error(format!("section [{}] is not used by experiment {}", other.section(), experiment.id()));
        }
    }

    let uses_physics = experiment != Experiment::FermiTable;
    let uses_potential = !matches!(experiment, Experiment::FermiTable | Experiment::LandauCheck);
    let needs_seed = matches!(
        experiment,
        Experiment::BoxEquivalence | Experiment::ClassicalBvl | Experiment::GeometryVerify
    );
    if !uses_physics && parsed.physics.is_some() {
        ck.error(format!("section [physics] is not used by experiment {}", experiment.id()));
    }
    if !uses_potential && parsed.potential.is_some() {
        ck.error(format!("section [potential] is not used by experiment {}", experiment.id()));
    }
    let seed = if needs_seed { ck.seed(experiment, parsed.seed) } else { parsed.seed };

    let raw_physics = parsed.physics.unwrap_or_default();
    let needs_rho = match experiment {
        Experiment::LimitStudy | Experiment::BoxEquivalence => true,
        Experiment::LandauCheck => parsed.landau_check.as_ref().is_none_or(|l| l.z_grid.is_none()),
        _ => false,
    };
    let physics = if uses_physics {
        let beta = ck.required("physics.beta", raw_physics.beta);
        let beta = ck.positive("physics.beta", beta);
        let rho = if needs_rho {
            let rho = ck.required("physics.rho", raw_physics.rho);
            ck.positive("physics.rho", rho)
        } else {
            ck.positive("physics.rho", raw_physics.rho)
        };
        let g = ck.or_default("physics.g", raw_physics.g, 2.0);
        if !(g.is_finite() && g <= 2.0) {
            ck.error(format!("`physics.g` must be finite and at most 2, got {g}"));
        }
        let q = ck.or_default("physics.q", raw_physics.q, 1.0);
        if !(q.is_finite() && q != 0.0) {
            ck.error(format!("`physics.q` must be finite and non-zero, got {q}"));
        }
        let c = ck.or_default("physics.c", raw_physics.c, 1.0);
        ck.positive("physics.c", Some(c));
        beta.map(|beta| Physics { beta, rho, g, q, c })
    } else {
        None
    };

    let potential = if uses_potential {
        let raw = parsed.potential.unwrap_or_default();
        let name = ck.required("potential.name", raw.name);
        let params = ck.or_default("potential.params", raw.params, Vec::new());
        name.and_then(|name| {
            let cfg = PotentialConfig { name, params };
            match cfg.build() {
                Ok(_) => Some(cfg),
                Err(e) => {
                    ck.error(format!("potential: {e}"));
                    None
                }
            }
        })
    } else {
        None
    };

    let settings = match experiment {
        Experiment::LimitStudy => limit_study(&mut ck, parsed.limit_study.unwrap_or_default()).map(Settings::LimitStudy),
        Experiment::LandauCheck => {
            landau_check(&mut ck, parsed.landau_check.unwrap_or_default()).map(Settings::LandauCheck)
        }
        Experiment::BoxEquivalence => {
            box_equivalence(&mut ck, parsed.box_equivalence.unwrap_or_default()).map(Settings::BoxEquivalence)
        }
        Experiment::ClassicalBvl => {
            classical_bvl(&mut ck, parsed.classical_bvl.unwrap_or_default()).map(Settings::ClassicalBvl)
        }
        Experiment::GeometryVerify => {
            geometry_verify(&mut ck, parsed.geometry_verify.unwrap_or_default()).map(Settings::GeometryVerify)
        }
        Experiment::FermiTable => fermi_table(&mut ck, parsed.fermi_table.unwrap_or_default()).map(Settings::FermiTable),
    };

    if !ck.errors.is_empty() {
        return Err(CliError::Config(ck.errors));
    }
    Ok(ExperimentConfig {
        experiment,
        seed,
        physics,
        potential,
        settings: settings.expect("settings present when no errors were recorded"),
        output_dir: parsed.output.and_then(|o| o.dir),
        defaults_applied: ck.defaults,
    })
}

fn limit_study(ck: &mut Checker, raw: RawLimitStudy) -> Option<LimitStudySettings> {
    let grid = ck.required("limit_study.hbar_grid", raw.hbar_grid);
    if let Some(g) = &grid {
        ck.decreasing_hbar("limit_study.hbar_grid", g, 3);
    }
    let tolerance = ck.or_default("limit_study.tolerance", raw.tolerance, DEFAULT_FIXED_POINT_TOL);
    ck.positive("limit_study.tolerance", Some(tolerance));
    let max_iter = ck.or_default("limit_study.max_iter", raw.max_iter, DEFAULT_FIXED_POINT_ITER);
    ck.at_least("limit_study.max_iter", max_iter, 1);
    let cell_order = ck.or_default("limit_study.cell_order", raw.cell_order, 32);
    ck.at_least("limit_study.cell_order", cell_order, 2);
    let cell_tolerance = ck.or_default("limit_study.cell_tolerance", raw.cell_tolerance, 1e-12);
    ck.positive("limit_study.cell_tolerance", Some(cell_tolerance));
    Some(LimitStudySettings {
        hbar_grid: grid?,
        tolerance,
        max_iter,
        cell_order,
        cell_tolerance,
    })
}

fn landau_check(ck: &mut Checker, raw: RawLandauCheck) -> Option<LandauCheckSettings> {
    let hbar = ck.required("landau_check.hbar", raw.hbar);
    let hbar = ck.positive("landau_check.hbar", hbar);
    if raw.z_grid.is_none() {
        ck.defaults.push("landau_check.z_grid = matched fugacity".into());
    }
    if let Some(z) = &raw.z_grid {
        ck.nonempty("landau_check.z_grid", z);
        if let Some(v) = z.iter().find(|&&v| !(v > 0.0)) {
            ck.error(format!("`landau_check.z_grid` values must be positive, got {v}"));
        }
    }
    let richardson_levels = ck.or_default("landau_check.richardson_levels", raw.richardson_levels, 3);
    ck.at_least("landau_check.richardson_levels", richardson_levels, 1);
    if raw.fd_step.is_none() {
        ck.defaults.push("landau_check.fd_step = 0.05/(hbar*sqrt(beta))".into());
    }
    let fd_step = ck.positive("landau_check.fd_step", raw.fd_step);
    let k_quadrature = ck.or_default("landau_check.k_quadrature", raw.k_quadrature, 16);
    ck.at_least("landau_check.k_quadrature", k_quadrature, 2);
    if let Some(n) = raw.level_cutoff {
        ck.at_least("landau_check.level_cutoff", n, 1);
    }
    let tail_tolerance = ck.or_default("landau_check.tail_tolerance", raw.tail_tolerance, 1e-14);
    ck.positive("landau_check.tail_tolerance", Some(tail_tolerance));
    Some(LandauCheckSettings {
        hbar: hbar?,
        z_grid: raw.z_grid,
        richardson_levels,
        fd_step,
        k_quadrature,
        level_cutoff: raw.level_cutoff,
        tail_tolerance,
    })
}

fn box_equivalence(ck: &mut Checker, raw: RawBoxEquivalence) -> Option<BoxEquivalenceSettings> {
    let hbar = ck.required("box_equivalence.hbar", raw.hbar);
    let hbar = ck.positive("box_equivalence.hbar", hbar);
    let boxes = ck.required("box_equivalence.boxes", raw.boxes);
    if let Some(list) = &boxes {
        if list.is_empty() {
            ck.error("`box_equivalence.boxes` must not be empty");
        }
        for (i, b) in list.iter().enumerate() {
            ck.positive(&format!("box_equivalence.boxes[{i}].side"), Some(b.side));
            ck.at_least(&format!("box_equivalence.boxes[{i}].points"), b.points, 4);
        }
    }
    if raw.field_step.is_none() {
        ck.defaults.push("box_equivalence.field_step = min(0.05/(hbar*sqrt(beta)), 0.1*hbar/L^2)".into());
    }
    let field_step = ck.positive("box_equivalence.field_step", raw.field_step);
    let dense_limit = ck.or_default("box_equivalence.dense_limit", raw.dense_limit, 4096);
    let matrix_dump = ck.or_default("box_equivalence.matrix_dump", raw.matrix_dump, false);
    Some(BoxEquivalenceSettings {
        hbar: hbar?,
        boxes: boxes?,
        field_step,
        dense_limit,
        matrix_dump,
    })
}

fn classical_bvl(ck: &mut Checker, raw: RawClassicalBvl) -> Option<ClassicalBvlSettings> {
    let particles = ck.required("classical_bvl.particles", raw.particles);
    if let Some(n) = particles {
        ck.at_least("classical_bvl.particles", n, 1);
    }
    let box_side = ck.required("classical_bvl.box_side", raw.box_side);
    let box_side = ck.positive("classical_bvl.box_side", box_side);
    let fields = ck.required("classical_bvl.fields", raw.fields);
    if let Some(f) = &fields {
        ck.nonempty("classical_bvl.fields", f);
        if f.contains(&0.0) {
            ck.error("`classical_bvl.fields` must not contain 0 (the moment is defined for B != 0)");
        }
    }
    let samples = ck.or_default("classical_bvl.samples", raw.samples, 20_000);
    ck.at_least("classical_bvl.samples", samples, 1000);
    let planck = ck.or_default("classical_bvl.planck", raw.planck, 1.0);
    ck.positive("classical_bvl.planck", Some(planck));
    let gauge_positions = ck.or_default("classical_bvl.gauge_positions", raw.gauge_positions, 100);
    ck.at_least("classical_bvl.gauge_positions", gauge_positions, 1);
    Some(ClassicalBvlSettings {
        particles: particles?,
        box_side: box_side?,
        fields: fields?,
        samples,
        planck,
        gauge_positions,
    })
}

fn geometry_verify(ck: &mut Checker, raw: RawGeometryVerify) -> Option<GeometryVerifySettings> {
    let alpha = ck.required("geometry_verify.alpha", raw.alpha);
    if let Some(a) = alpha {
        if !(a > 0.0 && a < 1.0) {
            ck.error(format!("`geometry_verify.alpha` must lie in (0, 1), got {a}"));
        }
    }
    let hbar = ck.required("geometry_verify.hbar", raw.hbar);
    let hbar = ck.positive("geometry_verify.hbar", hbar);
    let admissibility = ck.or_default("geometry_verify.admissibility", raw.admissibility, "strict".to_string());
    if admissibility != "strict" && admissibility != "relaxed" {
        ck.error(format!("`geometry_verify.admissibility` must be \"strict\" or \"relaxed\", got {admissibility:?}"));
    }
    let partition_points = ck.or_default("geometry_verify.partition_points", raw.partition_points, 20);
    ck.at_least("geometry_verify.partition_points", partition_points, 1);
    let holder_hbar_grid = ck.or_default("geometry_verify.holder_hbar_grid", raw.holder_hbar_grid, vec![1e-4, 1e-5, 1e-6]);
    ck.decreasing_hbar("geometry_verify.holder_hbar_grid", &holder_hbar_grid, 2);
    let holder_centers = ck.or_default("geometry_verify.holder_centers", raw.holder_centers, 200);
    ck.at_least("geometry_verify.holder_centers", holder_centers, 1);
    let kernel_xi = ck.or_default("geometry_verify.kernel_xi", raw.kernel_xi, [-2.0, 0.0]);
    if kernel_xi[1] == 0.0 && kernel_xi[0] >= 0.0 {
        ck.error(format!("`geometry_verify.kernel_xi` must avoid the cut [0, inf), got {kernel_xi:?}"));
    }
    let kernel_hbar = ck.or_default("geometry_verify.kernel_hbar", raw.kernel_hbar, 0.5);
    ck.positive("geometry_verify.kernel_hbar", Some(kernel_hbar));
    let contour_nodes = ck.or_default("geometry_verify.contour_nodes", raw.contour_nodes, 4000);
    ck.at_least("geometry_verify.contour_nodes", contour_nodes, 64);
    let fermi_pairs = ck.or_default("geometry_verify.fermi_pairs", raw.fermi_pairs, 20);
    ck.at_least("geometry_verify.fermi_pairs", fermi_pairs, 1);
    Some(GeometryVerifySettings {
        alpha: alpha?,
        hbar: hbar?,
        admissibility,
        partition_points,
        holder_hbar_grid,
        holder_centers,
        kernel_xi,
        kernel_hbar,
        contour_nodes,
        fermi_pairs,
    })
}

fn fermi_table(ck: &mut Checker, raw: RawFermiTable) -> Option<FermiTableSettings> {
    let nu = ck.required("fermi_table.nu", raw.nu);
    if let Some(list) = &nu {
        ck.nonempty("fermi_table.nu", list);
        for &v in list {
            if let Err(e) = FermiOrder::new(v) {
                ck.error(format!("`fermi_table.nu`: {e}"));
            }
        }
    }
    let u = ck.required("fermi_table.u", raw.u);
    if let Some(list) = &u {
        ck.nonempty("fermi_table.u", list);
        if let Some(v) = list.iter().find(|v| !(v.abs() < 1.0)) {
            ck.error(format!("`fermi_table.u` values must satisfy |u| < 1 for the series column, got {v}"));
        }
    }
    let terms = ck.or_default("fermi_table.terms", raw.terms, 200);
    ck.at_least("fermi_table.terms", terms, 1);
    let tolerance = ck.or_default("fermi_table.tolerance", raw.tolerance, 1e-13);
    ck.positive("fermi_table.tolerance", Some(tolerance));
    Some(FermiTableSettings {
        nu: nu?,
        u: u?,
        terms,
        tolerance,
    })
}
