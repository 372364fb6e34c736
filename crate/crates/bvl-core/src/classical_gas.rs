//! Classical Maxwell–Boltzmann gas in a box: configuration integral, free
//! energy and the vanishing thermal-average magnetization.

use crate::error::{domain, Result};
use crate::potentials::{Point, PeriodicPotential};
use crate::quadrature::{composite, composite_nodes, KahanSum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Pair interaction between particles. Only the ideal gas is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interaction {
    #[default]
    None,
}

/// N classical charged particles in Λ = (−L/2, L/2)³ with a uniform field B e₃.
///
/// The vector potential is the symmetric gauge A(x) = (B/2)(−x₂, x₁, 0).
/// Confinement is imposed by restricting positions to Λ.
#[derive(Debug, Clone)]
pub struct ClassicalGasSpec {
    pub particles: usize,
    pub box_side: f64,
    pub beta: f64,
    pub b_field: f64,
    /// Planck constant entering only the thermal wavelength λ_β = ħ√(2πβ).
    pub hbar_planck: f64,
    pub external_potential: PeriodicPotential,
    pub interaction: Interaction,
    /// Particle charge e.
    pub charge: f64,
    /// Speed of light c.
    pub light_speed: f64,
}

impl ClassicalGasSpec {
    /// Ideal gas with unit charge and c = 1.
    pub fn new(particles: usize, box_side: f64, beta: f64, b_field: f64, potential: PeriodicPotential) -> Result<Self> {
        let spec = Self {
            particles,
            box_side,
            beta,
            b_field,
            hbar_planck: 1.0,
            external_potential: potential,
            interaction: Interaction::None,
            charge: 1.0,
            light_speed: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks N ≥ 1, L > 0, β > 0, ħ > 0, c > 0 and a finite field.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.particles == 0 {
            problems.push("N must be at least 1".to_string());
        }
        if !(self.box_side > 0.0 && self.box_side.is_finite()) {
            problems.push(format!("box side must be positive, got {}", self.box_side));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            problems.push(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.hbar_planck > 0.0 && self.hbar_planck.is_finite()) {
            problems.push(format!("Planck constant must be positive, got {}", self.hbar_planck));
        }
        if !(self.light_speed > 0.0 && self.light_speed.is_finite()) {
            problems.push(format!("light speed must be positive, got {}", self.light_speed));
        }
        if !self.b_field.is_finite() || !self.charge.is_finite() {
            problems.push("field and charge must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(domain(problems.join("; ")))
        }
    }

    /// Same gas in a different field.
    pub fn with_field(&self, b_field: f64) -> Self {
        Self {
            b_field,
            ..self.clone()
        }
    }

    /// Box volume L³.
    pub fn volume(&self) -> f64 {
        self.box_side.powi(3)
    }

    /// Thermal wavelength ħ√(2πβ).
    pub fn thermal_wavelength(&self) -> f64 {
        self.hbar_planck * (2.0 * PI * self.beta).sqrt()
    }

    /// (e/c)A(x) in the symmetric gauge.
    pub fn scaled_vector_potential(&self, x: Point) -> Point {
        let k = self.charge / self.light_speed * self.b_field / 2.0;
        [-k * x[1], k * x[0], 0.0]
    }
}

/// How the position integral ∫_Λ e^{−βU} is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrationMethod {
    /// Tensor Gauss–Legendre with one panel per unit length and the given degree.
    Quadrature { degree: usize },
    /// Uniform Monte Carlo with a seed.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for IntegrationMethod {
    fn default() -> Self {
        IntegrationMethod::Quadrature { degree: 24 }
    }
}

/// ln 𝒵_conf together with the single-particle integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigurationIntegral {
    /// ln 𝒵_conf = −ln N! + N ln ∫_Λ e^{−βU}.
    pub ln_value: f64,
    /// ∫_Λ e^{−βU}.
    pub single_particle: f64,
    /// Standard error of `single_particle` (zero for quadrature).
    pub standard_error: f64,
}

/// ln N! by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    crate::quadrature::sum((2..=n).map(|k| (k as f64).ln()))
}

fn single_particle_quadrature(spec: &ClassicalGasSpec, degree: usize) -> Result<f64> {
    if degree < 2 {
        return Err(domain("quadrature degree must be at least 2"));
    }
    let half = spec.box_side / 2.0;
    let panels = spec.box_side.ceil().max(1.0) as usize;
    let nodes = composite_nodes(-half, half, panels, degree);
    let v = &spec.external_potential;
    let beta = spec.beta;
    let partial: Vec<f64> = nodes
        .par_iter()
        .map(|&(x, wx)| {
            let mut acc = KahanSum::default();
            for &(y, wy) in &nodes {
                for &(z, wz) in &nodes {
                    acc.add(wx * wy * wz * (-beta * v.value([x, y, z])).exp());
                }
            }
            acc.value()
        })
        .collect();
    Ok(crate::quadrature::sum(partial))
}

fn single_particle_mc(spec: &ClassicalGasSpec, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(domain("Monte Carlo needs at least two samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = spec.box_side / 2.0;
    let mut s = KahanSum::default();
    let mut s2 = KahanSum::default();
    for _ in 0..samples {
        let x = [
            rng.random_range(-half..half),
            rng.random_range(-half..half),
            rng.random_range(-half..half),
        ];
        let w = (-spec.beta * spec.external_potential.value(x)).exp();
        s.add(w);
        s2.add(w * w);
    }
    let n = samples as f64;
    let mean = s.value() / n;
    let var = (s2.value() / n - mean * mean).max(0.0) * n / (n - 1.0);
    let vol = spec.volume();
    Ok((vol * mean, vol * (var / n).sqrt()))
}

/// ln 𝒵_conf(β, N, Λ) of the ideal gas; the N-particle integral factorizes.
pub fn configuration_integral(spec: &ClassicalGasSpec, method: IntegrationMethod) -> Result<ConfigurationIntegral> {
    spec.validate()?;
    let (single, se) = match method {
        IntegrationMethod::Quadrature { degree } => (single_particle_quadrature(spec, degree)?, 0.0),
        IntegrationMethod::MonteCarlo { samples, seed } => single_particle_mc(spec, samples, seed)?,
    };
    Ok(ConfigurationIntegral {
        ln_value: -ln_factorial(spec.particles) + spec.particles as f64 * single.ln(),
        single_particle: single,
        standard_error: se,
    })
}

/// 𝓕 = −(βL³)⁻¹ ln(λ_β^{−3N} 𝒵_conf), with 𝒵_conf by quadrature.
///
/// The field enters the Hamiltonian only through p − (e/c)A, which the
/// momentum integral absorbs, so the value never reads `b_field`.
pub fn classical_free_energy_density(spec: &ClassicalGasSpec) -> Result<f64> {
    let conf = configuration_integral(spec, IntegrationMethod::default())?;
    let n = spec.particles as f64;
    let ln_partition = -3.0 * n * spec.thermal_wavelength().ln() + conf.ln_value;
    Ok(-ln_partition / (spec.beta * spec.volume()))
}

/// Position drawn from e^{−βU} on Λ by rejection against the bound U ≥ −‖U‖∞.
fn sample_position(spec: &ClassicalGasSpec, rng: &mut ChaCha8Rng) -> Point {
    let half = spec.box_side / 2.0;
    let sup = spec.external_potential.sup_norm;
    loop {
        let x = [
            rng.random_range(-half..half),
            rng.random_range(-half..half),
            rng.random_range(-half..half),
        ];
        let accept = (-spec.beta * (spec.external_potential.value(x) + sup)).exp();
        if rng.random::<f64>() < accept {
            return x;
        }
    }
}

const MC_CHUNK: usize = 1024;

/// Monte Carlo estimate of ⟨Σ_j μ_{j,3}⟩/L³ with μ₃ = −(1/B)(e/c) v·A(x).
///
/// Momenta follow p ∼ (e/c)A(x) + 𝒩(0, β⁻¹) per component; positions follow
/// e^{−βU}. Samples are split into chunks of 1024, each with its own ChaCha
/// stream, so the result depends only on the seed. Returns (mean, standard error).
pub fn magnetization_mc(spec: &ClassicalGasSpec, samples: usize, rng_seed: u64) -> Result<(f64, f64)> {
    spec.validate()?;
    if spec.b_field == 0.0 {
        return Err(domain("magnetic moment needs B != 0"));
    }
    if samples < 1000 {
        return Err(domain(format!("magnetization_mc needs at least 1000 samples, got {samples}")));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let sigma = spec.beta.sqrt().recip();
    let scale = -spec.charge / (spec.light_speed * spec.b_field);
    let vol = spec.volume();
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut s = KahanSum::default();
            let mut s2 = KahanSum::default();
            for _ in 0..count {
                let mut total = 0.0;
                for _ in 0..spec.particles {
                    let x = sample_position(spec, &mut rng);
                    let a = spec.scaled_vector_potential(x);
                    let mut dot = 0.0;
                    for &ai in &a {
                        let noise: f64 = rng.sample(StandardNormal);
                        let p = ai + sigma * noise;
                        dot += (p - ai) * ai;
                    }
                    total += scale * dot;
                }
                let m = total / vol;
                s.add(m);
                s2.add(m * m);
            }
            (s.value(), s2.value())
        })
        .collect();
    let n = samples as f64;
    let sum = crate::quadrature::sum(partial.iter().map(|p| p.0));
    let sum2 = crate::quadrature::sum(partial.iter().map(|p| p.1));
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Magnetization with the momentum integral done in closed form first.
///
/// For each position the velocity v = p − (e/c)A is centred Gaussian, so its
/// first moment is the literal zero and every per-position contribution
/// ⟨v⟩·A vanishes before any position is sampled.
pub fn magnetization_analytic(spec: &ClassicalGasSpec, samples: usize, rng_seed: u64) -> Result<f64> {
    spec.validate()?;
    if spec.b_field == 0.0 {
        return Err(domain("magnetic moment needs B != 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = -spec.charge / (spec.light_speed * spec.b_field);
    let mean_velocity = [0.0f64; 3];
    let mut acc = 0.0;
    for _ in 0..samples.max(1) {
        let x = sample_position(spec, &mut rng);
        let a = spec.scaled_vector_potential(x);
        let dot: f64 = mean_velocity.iter().zip(&a).map(|(v, ai)| v * ai).sum();
        acc += scale * dot * spec.particles as f64;
    }
    Ok(acc / (samples.max(1) as f64 * spec.volume()))
}

/// Composite Gauss–Legendre rule for the one-dimensional momentum integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumQuadrature {
    pub panels: usize,
    pub degree: usize,
    /// Half-width of the integration window in units of the thermal spread β^{−1/2}.
    pub reach: f64,
}

impl Default for MomentumQuadrature {
    fn default() -> Self {
        Self {
            panels: 24,
            degree: 20,
            reach: 12.0,
        }
    }
}

fn gaussian_integral(beta: f64, shift: f64, quad: &MomentumQuadrature) -> f64 {
    let r = quad.reach / beta.sqrt();
    composite(shift - r, shift + r, quad.panels, quad.degree, |p| {
        let v = p - shift;
        (-0.5 * beta * v * v).exp()
    })
}

/// Largest relative gap between ∫e^{−β(p−(e/c)A)²/2}dp and ∫e^{−βp²/2}dp.
///
/// The shifted integral is evaluated on a window centred at the shift, which
/// is what the substitution p → p + (e/c)A does; the positions are drawn
/// uniformly in Λ from the seed.
pub fn gauge_shift_invariance_check(
    spec: &ClassicalGasSpec,
    quad: &MomentumQuadrature,
    positions: usize,
    seed: u64,
) -> Result<f64> {
    spec.validate()?;
    if quad.panels == 0 || quad.degree < 2 || !(quad.reach > 0.0) {
        return Err(domain("momentum quadrature needs panels >= 1, degree >= 2 and reach > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = spec.box_side / 2.0;
    let unshifted = gaussian_integral(spec.beta, 0.0, quad).powi(3);
    let mut worst: f64 = 0.0;
    for _ in 0..positions.max(1) {
        let x = [
            rng.random_range(-half..half),
            rng.random_range(-half..half),
            rng.random_range(-half..half),
        ];
        let a = spec.scaled_vector_potential(x);
        let shifted: f64 = a.iter().map(|&ai| gaussian_integral(spec.beta, ai, quad)).product();
        worst = worst.max((shifted - unshifted).abs() / unshifted);
    }
    Ok(worst)
}
