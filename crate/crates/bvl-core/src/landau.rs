//! Exact free-gas (V ≡ 0) pressure, density and susceptibility from Landau-level sums.
//!
//! Every integral here uses its own quadrature so that the results stay
//! independent of the Fermi–Dirac module they are compared against.

use crate::error::{domain, Error, Result};
use crate::quadrature::{composite_nodes, KahanSum};
use crate::semiclassics::{Provenance, SusceptibilityBreakdown, ThermoParams};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Controls for the level sum and the field derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauSumSpec {
    /// Highest Landau index kept; `None` picks the smallest n with βħ|b|n ≥ 40.
    pub level_cutoff: Option<usize>,
    /// Gauss–Legendre nodes per panel in the axial momentum integral (8 panels).
    pub k_quadrature: usize,
    /// Field step of the coarsest difference; `None` uses 0.05·√(1/β)/ħ.
    pub fd_step: Option<f64>,
    /// Number of halvings in the Richardson table.
    pub richardson_levels: usize,
    /// Largest admissible relative tail bound of the level sum.
    pub tail_tolerance: f64,
}

impl Default for LandauSumSpec {
    fn default() -> Self {
        Self {
            level_cutoff: None,
            k_quadrature: 16,
            fd_step: None,
            richardson_levels: 3,
            tail_tolerance: 1e-14,
        }
    }
}

impl LandauSumSpec {
    fn validate(&self) -> Result<()> {
        if self.level_cutoff == Some(0) {
            return Err(domain("level_cutoff must be >= 1"));
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0) {
                return Err(domain("fd_step must be positive"));
            }
        }
        if self.k_quadrature < 2 || self.richardson_levels < 1 {
            return Err(domain("k_quadrature must be >= 2 and richardson_levels >= 1"));
        }
        Ok(())
    }

    /// Field step actually used at the given parameters.
    pub fn step(&self, params: &ThermoParams) -> f64 {
        self.fd_step.unwrap_or(0.05 * (1.0 / params.beta).sqrt() / params.hbar)
    }
}

const THERMAL_REACH: f64 = 40.0;

/// Radial nodes for ∫₀^∞ p² g(p) dp against a Gaussian-weighted integrand.
fn radial_nodes(beta: f64) -> Vec<(f64, f64)> {
    let pmax = (2.0 * THERMAL_REACH / beta).sqrt();
    composite_nodes(0.0, pmax, 48, 20)
}

/// Zero-field pressure (2/β)(2πħ)⁻³ ∫ d³p ln(1 + z e^{−βp²/2}).
pub fn zero_field_pressure(params: &ThermoParams, z: f64) -> Result<f64> {
    check(params, z)?;
    let beta = params.beta;
    let mut acc = KahanSum::default();
    for (p, w) in radial_nodes(beta) {
        acc.add(w * p * p * (z * (-0.5 * beta * p * p).exp()).ln_1p());
    }
    Ok(2.0 / beta * 4.0 * PI * acc.value() / (2.0 * PI * params.hbar).powi(3))
}

/// Zero-field density 2(2πħ)⁻³ ∫ d³p z e^{−βp²/2}/(1 + z e^{−βp²/2}).
pub fn zero_field_density(params: &ThermoParams, z: f64) -> Result<f64> {
    check(params, z)?;
    let beta = params.beta;
    let mut acc = KahanSum::default();
    for (p, w) in radial_nodes(beta) {
        let e = z * (-0.5 * beta * p * p).exp();
        acc.add(w * p * p * e / (1.0 + e));
    }
    Ok(2.0 * 4.0 * PI * acc.value() / (2.0 * PI * params.hbar).powi(3))
}

/// Fugacity with zero_field_density(z) = ρ, by bisection to relative width 10⁻¹⁵.
pub fn matched_fugacity(params: &ThermoParams) -> Result<f64> {
    let rho = params.rho;
    let mut lo = 0.0;
    let mut hi = 1e-6;
    while zero_field_density(params, hi)? < rho {
        lo = hi;
        hi *= 4.0;
        if hi > 1e300 {
            return Err(Error::Numeric("density target unreachable".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if zero_field_density(params, mid)? < rho {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check(params: &ThermoParams, z: f64) -> Result<()> {
    if !(params.beta > 0.0) || !(params.hbar > 0.0) {
        return Err(domain("beta and hbar must be positive"));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(domain(format!("fugacity must be positive, got {z}")));
    }
    Ok(())
}

/// Pressure P(β, z, b) of both spin branches.
///
/// For b ≠ 0 this is the Landau-level sum
/// (|b|/2πħ) Σ_n Σ_s ∫dk/2π β⁻¹ ln(1 + z e^{−β(ħ|b|(n+½) + ħ²k²/2 − s·għb/4)}),
/// for b = 0 the zero-field integral.
pub fn landau_pressure(params: &ThermoParams, z: f64, spec: &LandauSumSpec) -> Result<f64> {
    check(params, z)?;
    spec.validate()?;
    let b = params.b;
    if b == 0.0 {
        return zero_field_pressure(params, z);
    }
    let beta = params.beta;
    let hbar = params.hbar;
    let spacing = hbar * b.abs();
    let n_max = spec
        .level_cutoff
        .unwrap_or_else(|| (THERMAL_REACH / (beta * spacing)).ceil() as usize);
    let kmax = (2.0 * THERMAL_REACH).sqrt() / (hbar * beta.sqrt());
    let k_nodes = composite_nodes(0.0, kmax, 8, spec.k_quadrature);
    let k_factors: Vec<(f64, f64)> = k_nodes
        .iter()
        .map(|&(k, w)| (w, (-0.5 * beta * hbar * hbar * k * k).exp()))
        .collect();
    let zeeman = params.g * hbar * b / 4.0;
    let axial = |energy: f64| -> f64 {
        let ze = z * (-beta * energy).exp();
        let mut acc = KahanSum::default();
        for &(w, f) in &k_factors {
            acc.add(w * (ze * f).ln_1p());
        }
        acc.value() / PI
    };
    let level = |n: usize| -> f64 {
        let e = spacing * (n as f64 + 0.5);
        axial(e - zeeman) + axial(e + zeeman)
    };
    const CHUNK: usize = 256;
    let chunks = (n_max + 1).div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = KahanSum::default();
            for n in (c * CHUNK)..((c + 1) * CHUNK).min(n_max + 1) {
                acc.add(level(n));
            }
            acc.value()
        })
        .collect();
    let mut total = KahanSum::default();
    for p in partials {
        total.add(p);
    }
    let prefactor = b.abs() / (2.0 * PI * hbar) / beta;
    let pressure = prefactor * total.value();
    let gauss = (2.0 * PI / (beta * hbar * hbar)).sqrt() / (2.0 * PI);
    let first_dropped = spacing * (n_max as f64 + 1.5) - zeeman.abs();
    let tail = prefactor * 2.0 * z * (-beta * first_dropped).exp() * gauss / (1.0 - (-beta * spacing).exp());
    if tail > spec.tail_tolerance * pressure {
        return Err(Error::Accuracy {
            what: format!("Landau level sum truncated at n = {n_max}"),
            achieved: tail / pressure,
            requested: spec.tail_tolerance,
        });
    }
    Ok(pressure)
}

/// Second field derivative of P at b = 0 with its Richardson diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDerivative {
    /// (q/c)² ∂²_b P at b = 0.
    pub second: f64,
    /// (q/c) ∂_b P at b = 0 from the odd difference at the finest step.
    pub first: f64,
    /// Steps used, coarsest first.
    pub steps: Vec<f64>,
    /// Richardson diagonal, one entry per level.
    pub diagonal: Vec<f64>,
}

/// Central second differences at h, h/2, … combined by Richardson elimination.
pub fn richardson_second_derivative<F>(mut f: F, h: f64, levels: usize) -> Result<FieldDerivative>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(0.0)?;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut steps = Vec::with_capacity(levels);
    let mut first = 0.0;
    for i in 0..levels {
        let step = h / 2f64.powi(i as i32);
        let fp = f(step)?;
        let fm = f(-step)?;
        first = (fp - fm) / (2.0 * step);
        let mut row = vec![(fp - 2.0 * f0 + fm) / (step * step)];
        for j in 1..=i {
            let factor = 4f64.powi(j as i32);
            let value = (factor * row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            row.push(value);
        }
        table.push(row);
        steps.push(step);
    }
    let diagonal: Vec<f64> = table.iter().map(|r| *r.last().unwrap()).collect();
    let value = *diagonal.last().unwrap();
    if diagonal.len() >= 3 {
        let d1 = (diagonal[diagonal.len() - 2] - diagonal[diagonal.len() - 3]).abs();
        let d2 = (diagonal[diagonal.len() - 1] - diagonal[diagonal.len() - 2]).abs();
        let floor = 1e-9 * value.abs().max(f64::MIN_POSITIVE);
        if d2 > d1 && d2 > floor {
            return Err(Error::Accuracy {
                what: format!("Richardson table not contracting (diagonal {diagonal:?})"),
                achieved: d2 / value.abs(),
                requested: d1 / value.abs(),
            });
        }
    }
    Ok(FieldDerivative {
        second: value,
        first,
        steps,
        diagonal,
    })
}

/// Total susceptibility (q/c)²∂²_bP and zero-field magnetization (q/c)∂_bP.
pub fn landau_field_derivatives(params: &ThermoParams, z: f64, spec: &LandauSumSpec) -> Result<FieldDerivative> {
    check(params, z)?;
    spec.validate()?;
    let h = spec.step(params);
    let qc = params.q / params.c;
    let mut d = richardson_second_derivative(
        |b| landau_pressure(&params.with_b(b), z, spec),
        h,
        spec.richardson_levels,
    )?;
    d.second *= qc * qc;
    d.first *= qc;
    for v in d.diagonal.iter_mut() {
        *v *= qc * qc;
    }
    Ok(d)
}

/// Zero-field susceptibility: total at the given g, orbital at g = 0, spin the difference.
pub fn landau_susceptibility_zero_field(
    params: &ThermoParams,
    z: f64,
    spec: &LandauSumSpec,
) -> Result<SusceptibilityBreakdown> {
    let total = landau_field_derivatives(params, z, spec)?.second;
    let orbital = landau_field_derivatives(&params.with_g(0.0), z, spec)?.second;
    Ok(SusceptibilityBreakdown::new(orbital, total - orbital, Provenance::Oracle))
}
