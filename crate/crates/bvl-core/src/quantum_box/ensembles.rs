//! Grand-canonical and canonical ensembles over a finite spectrum, the
//! Darwin–Fowler contour, the finite-volume Legendre transform and the box
//! susceptibilities obtained from field finite differences.

use super::eigen::{box_spectrum, EigenOptions};
use super::{BoxDiscretization, Spectrum};
use crate::error::{domain, Error, Result};
use crate::landau::richardson_second_derivative;
use crate::potentials::PeriodicPotential;
use crate::semiclassics::{Provenance, SusceptibilityBreakdown, ThermoParams};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// ln(1 + eᵗ) without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// 1/(1 + e^{−t}).
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {x}")))
    }
}

/// (β|Λ|)⁻¹ Σ_j ln(1 + z e^{−βλ_j}).
pub fn gc_pressure_fv(spectrum: &Spectrum, beta: f64, z: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_positive("fugacity", z)?;
    let lz = z.ln();
    let s = crate::quadrature::sum(spectrum.eigenvalues.iter().map(|&l| softplus(lz - beta * l)));
    Ok(s / (beta * spectrum.volume))
}

/// |Λ|⁻¹ Σ_j z e^{−βλ_j}/(1 + z e^{−βλ_j}).
pub fn gc_density_fv(spectrum: &Spectrum, beta: f64, z: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_positive("fugacity", z)?;
    Ok(density_at_log_fugacity(spectrum, beta, z.ln()))
}

fn density_at_log_fugacity(spectrum: &Spectrum, beta: f64, lz: f64) -> f64 {
    crate::quadrature::sum(spectrum.eigenvalues.iter().map(|&l| logistic(lz - beta * l))) / spectrum.volume
}

fn number_variance(spectrum: &Spectrum, beta: f64, lz: f64) -> f64 {
    crate::quadrature::sum(spectrum.eigenvalues.iter().map(|&l| {
        let f = logistic(lz - beta * l);
        f * (1.0 - f)
    }))
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + crate::quadrature::sum(values.iter().map(|v| (v - m).exp())).ln()
}

fn check_particles(spectrum: &Spectrum, n: usize) -> Result<()> {
    if n > spectrum.count() {
        return Err(domain(format!(
            "particle number {n} exceeds the {} available levels",
            spectrum.count()
        )));
    }
    Ok(())
}

/// ln Z_N from Z_N = N⁻¹ Σ_{k=1}^{N} (−1)^{k+1} S_k Z_{N−k}, S_k = Σ_j e^{−kβλ_j}.
///
/// Positive and negative terms are accumulated separately in log form. A
/// non-positive partial Z_k, or more than eight digits lost to cancellation,
/// aborts with a numeric error.
pub fn canonical_partition_recursive(spectrum: &Spectrum, n: usize, beta: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_particles(spectrum, n)?;
    if n == 0 {
        return Ok(0.0);
    }
    let ground = spectrum.ground();
    let shifted: Vec<f64> = spectrum.eigenvalues.iter().map(|l| -beta * (l - ground)).collect();
    let ln_s: Vec<f64> = (0..=n)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let kf = k as f64;
            -kf * beta * ground + log_sum_exp(&shifted.iter().map(|s| kf * s).collect::<Vec<_>>())
        })
        .collect();
    let mut ln_z = vec![0.0; n + 1];
    for m in 1..=n {
        let mut pos = Vec::with_capacity(m.div_ceil(2));
        let mut neg = Vec::with_capacity(m / 2);
        for k in 1..=m {
            let term = ln_s[k] + ln_z[m - k];
            if k % 2 == 1 {
                pos.push(term);
            } else {
                neg.push(term);
            }
        }
        let lp = log_sum_exp(&pos);
        let ln_neg = log_sum_exp(&neg);
        let ratio = (ln_neg - lp).exp();
        if !(ratio < 1.0) {
            return Err(Error::Numeric(format!(
                "fermionic recursion produced a non-positive Z_{m} (negative/positive ratio {ratio})"
            )));
        }
        if 1.0 - ratio < 1e-8 {
            return Err(Error::Numeric(format!(
                "fermionic recursion lost more than eight digits at Z_{m} (1 - ratio = {:e})",
                1.0 - ratio
            )));
        }
        ln_z[m] = lp + (-ratio).ln_1p() - (m as f64).ln();
    }
    Ok(ln_z[n])
}

/// ln Z_N as the N-th elementary symmetric polynomial of the Boltzmann weights.
///
/// The coefficients of ∏_j(1 + ζ e^{−βλ_j}) are built one level at a time;
/// every term is positive, so no cancellation occurs at any filling.
pub fn canonical_partition_product(spectrum: &Spectrum, n: usize, beta: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_particles(spectrum, n)?;
    if n == 0 {
        return Ok(0.0);
    }
    let reference = spectrum.eigenvalues[n - 1];
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    let mut ln_scale = 0.0;
    for (j, &l) in spectrum.eigenvalues.iter().enumerate() {
        let w = (-beta * (l - reference)).exp();
        let top = (j + 1).min(n);
        for k in (1..=top).rev() {
            e[k] += w * e[k - 1];
        }
        let big = e.iter().copied().fold(0.0, f64::max);
        if big > 1e200 {
            e.iter_mut().for_each(|x| *x *= 1e-200);
            ln_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    if !(e[n] > 0.0) {
        return Err(Error::Numeric("canonical partition function underflowed".into()));
    }
    Ok(e[n].ln() + ln_scale - n as f64 * beta * reference)
}

/// Darwin–Fowler contour value with its cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourResult {
    /// ln Z_N from the trapezoid rule on the circle.
    pub ln_z: f64,
    /// ln Z_N from the product expansion.
    pub reference_ln_z: f64,
    /// |Z_contour/Z_reference − 1|.
    pub relative_gap: f64,
    /// True when the gap exceeds 10⁻⁸.
    pub flagged: bool,
    /// Radius actually used.
    pub radius: f64,
}

/// Fugacity at which the grand-canonical density equals ρ.
fn solve_log_fugacity(spectrum: &Spectrum, beta: f64, rho: f64) -> Result<f64> {
    let max_density = spectrum.count() as f64 / spectrum.volume;
    if !(rho > 0.0 && rho < max_density) {
        return Err(domain(format!(
            "density {rho} outside the reachable range (0, {max_density})"
        )));
    }
    let idx = ((rho * spectrum.volume).ceil() as usize).clamp(1, spectrum.count()) - 1;
    let t0 = beta * spectrum.eigenvalues[idx];
    let mut lo = t0 - 1.0;
    let mut hi = t0 + 1.0;
    let mut step = 1.0;
    while density_at_log_fugacity(spectrum, beta, lo) > rho {
        step *= 2.0;
        lo -= step;
    }
    step = 1.0;
    while density_at_log_fugacity(spectrum, beta, hi) < rho {
        step *= 2.0;
        hi += step;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if density_at_log_fugacity(spectrum, beta, mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// (2πi)⁻¹∮ ζ^{−(N+1)} Ξ(ζ) dζ on |ζ| = radius by the `points`-point trapezoid rule.
///
/// `radius = None` uses the saddle radius z̄ with density(z̄) = N/|Λ|.
pub fn canonical_partition_contour(
    spectrum: &Spectrum,
    n: usize,
    beta: f64,
    radius: Option<f64>,
    points: usize,
) -> Result<ContourResult> {
    check_positive("beta", beta)?;
    check_particles(spectrum, n)?;
    if points < 64 {
        return Err(domain(format!("contour needs at least 64 points, got {points}")));
    }
    let radius = match radius {
        Some(r) => {
            check_positive("radius", r)?;
            r
        }
        None if n == 0 => 1.0,
        None if n == spectrum.count() => (beta * spectrum.eigenvalues[n - 1]).exp() * 1e3,
        None => solve_log_fugacity(spectrum, beta, n as f64 / spectrum.volume)?.exp(),
    };
    let ln_w: Vec<f64> = spectrum.eigenvalues.iter().map(|l| -beta * l).collect();
    let ln_r = radius.ln();
    let nf = n as f64;
    let logs: Vec<Complex64> = (0..points)
        .map(|m| {
            let phi = 2.0 * PI * m as f64 / points as f64;
            let ln_zeta = Complex64::new(ln_r, phi);
            let mut acc = Complex64::new(0.0, 0.0);
            for &lw in &ln_w {
                let ln_x = ln_zeta + lw;
                if ln_x.re > 0.0 {
                    acc += ln_x + ((-ln_x).exp() + 1.0).ln();
                } else {
                    acc += (ln_x.exp() + 1.0).ln();
                }
            }
            acc - ln_zeta * nf
        })
        .collect();
    let peak = logs.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    let total: Complex64 = logs.iter().map(|c| (c - peak).exp()).sum();
    let value = total.re / points as f64;
    if !(value > 0.0) {
        return Err(Error::Numeric(format!(
            "contour sum is not positive ({value}); radius {radius} is far from the saddle"
        )));
    }
    let ln_z = value.ln() + peak;
    let reference_ln_z = canonical_partition_product(spectrum, n, beta)?;
    let relative_gap = (ln_z - reference_ln_z).exp_m1().abs();
    Ok(ContourResult {
        ln_z,
        reference_ln_z,
        relative_gap,
        flagged: relative_gap > 1e-8,
        radius,
    })
}

/// Finite-volume Legendre transform at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreResult {
    /// P* = (ρ_s/β) ln z̄ − P(z̄).
    pub p_star: f64,
    /// Fugacity where the density equals ρ_s.
    pub z_bar: f64,
}

/// P* = sup_μ(ρ_s μ − P) evaluated at the unique z̄ with density(z̄) = ρ_s.
pub fn legendre_pressure(spectrum: &Spectrum, beta: f64, rho_s: f64) -> Result<LegendreResult> {
    check_positive("beta", beta)?;
    let lz = solve_log_fugacity(spectrum, beta, rho_s)?;
    let z_bar = lz.exp();
    let p = gc_pressure_fv(spectrum, beta, z_bar)?;
    Ok(LegendreResult {
        p_star: rho_s / beta * lz - p,
        z_bar,
    })
}

/// Terms of F_L − P*_L = ln(N)/(2β|Λ|) − (β|Λ|)⁻¹ ln 𝒜.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarwinFowlerReport {
    pub particles: usize,
    /// F_L = −(β|Λ|)⁻¹ ln Z_N.
    pub f_canonical: f64,
    /// P*_L at ρ = N/|Λ|.
    pub p_star: f64,
    /// F_L − P*_L.
    pub gap: f64,
    /// ln(N)/(2β|Λ|).
    pub log_term: f64,
    /// ln 𝒜 implied by the identity.
    pub ln_a_exact: f64,
    /// Saddle-point estimate ½ ln(N/(2πσ²)) with σ² the grand-canonical number variance.
    pub ln_a_gaussian: f64,
    /// −(β|Λ|)⁻¹ ln 𝒜 from the saddle-point estimate.
    pub correction_estimate: f64,
    /// 2·ln(N)/(2β|Λ|) + |correction_estimate|.
    pub bound: f64,
    pub z_bar: f64,
}

/// Canonical free energy, Legendre pressure and the Darwin–Fowler correction.
pub fn darwin_fowler_report(spectrum: &Spectrum, beta: f64, n: usize) -> Result<DarwinFowlerReport> {
    if n == 0 {
        return Err(domain("Darwin-Fowler report needs N >= 1"));
    }
    let bv = beta * spectrum.volume;
    let ln_z = canonical_partition_product(spectrum, n, beta)?;
    let f_canonical = -ln_z / bv;
    let rho = n as f64 / spectrum.volume;
    let leg = legendre_pressure(spectrum, beta, rho)?;
    let gap = f_canonical - leg.p_star;
    let nf = n as f64;
    let log_term = nf.ln() / (2.0 * bv);
    let ln_a_exact = 0.5 * nf.ln() - bv * gap;
    let variance = number_variance(spectrum, beta, leg.z_bar.ln());
    let ln_a_gaussian = 0.5 * (nf / (2.0 * PI * variance)).ln();
    let correction_estimate = -ln_a_gaussian / bv;
    Ok(DarwinFowlerReport {
        particles: n,
        f_canonical,
        p_star: leg.p_star,
        gap,
        log_term,
        ln_a_exact,
        ln_a_gaussian,
        correction_estimate,
        bound: 2.0 * log_term + correction_estimate.abs(),
        z_bar: leg.z_bar,
    })
}

/// Field step of the box finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoxFieldStep {
    /// Finest step h (stencil b ∈ {0, ±h, ±2h}); `None` uses min(0.05/(ħ√β), 0.1ħ/L²).
    pub step: Option<f64>,
}

impl BoxFieldStep {
    /// Step used for a given box and parameters.
    pub fn resolve(&self, grid: &BoxDiscretization, params: &ThermoParams) -> f64 {
        self.step.unwrap_or_else(|| {
            let thermal = 0.05 / (params.hbar * params.beta.sqrt());
            let geometric = 0.1 * params.hbar / grid.side_length.powi(2);
            thermal.min(geometric)
        })
    }
}

/// Box susceptibilities of the spin-½ gas at b = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSusceptibilities {
    /// −(q/c)²∂²_b F_L at fixed N (both spins share the N particles).
    pub canonical: SusceptibilityBreakdown,
    /// (q/c)²∂²_b P_L at fixed z = z̄_L(b = 0).
    pub grand_canonical: SusceptibilityBreakdown,
    /// −(q/c)∂_b F_L at b = 0.
    pub magnetization: f64,
    /// Darwin–Fowler terms at b = 0.
    pub darwin_fowler: DarwinFowlerReport,
    pub particles: usize,
    pub step: f64,
}

/// Canonical and fixed-density grand-canonical susceptibilities of a box.
///
/// Orbital spectra are computed at b ∈ {0, ±h, ±2h}; both spin branches are
/// obtained by the Zeeman shift ∓għb/4 and merged, so the N particles may
/// populate either branch. The orbital part is the g = 0 result and the spin
/// part the difference.
pub fn box_susceptibilities(
    grid: &BoxDiscretization,
    params: &ThermoParams,
    potential: &PeriodicPotential,
    particles: usize,
    step: &BoxFieldStep,
    options: &EigenOptions,
) -> Result<BoxSusceptibilities> {
    params.validate()?;
    let h = step.resolve(grid, params);
    let fields = [-2.0 * h, -h, 0.0, h, 2.0 * h];
    let orbital: Vec<Spectrum> = fields
        .par_iter()
        .map(|&b| box_spectrum(grid, &params.with_b(b).with_g(0.0), potential, options))
        .collect::<Result<Vec<_>>>()?;
    if orbital.iter().any(|s| s.missing_levels > 0) {
        return Err(Error::Resource(
            "box susceptibilities need the complete spectrum; raise dense_limit or use a separable potential".into(),
        ));
    }
    let lookup = |b: f64| -> &Spectrum {
        let i = fields.iter().position(|&f| f == b).expect("stencil point");
        &orbital[i]
    };
    let beta = params.beta;
    let qc = params.q / params.c;
    let bv = beta * grid.volume();
    let union0 = lookup(0.0).spin_union(0.0);
    let darwin_fowler = darwin_fowler_report(&union0, beta, particles)?;
    let z_bar = darwin_fowler.z_bar;

    let canonical_x = |g: f64| -> Result<(f64, f64)> {
        let d = richardson_second_derivative(
            |b| Ok(-canonical_partition_product(&lookup(b).spin_union(g), particles, beta)? / bv),
            2.0 * h,
            2,
        )?;
        Ok((-qc * qc * d.second, -qc * d.first))
    };
    let gc_x = |g: f64| -> Result<f64> {
        let d = richardson_second_derivative(|b| gc_pressure_fv(&lookup(b).spin_union(g), beta, z_bar), 2.0 * h, 2)?;
        Ok(qc * qc * d.second)
    };
    let (c_total, magnetization) = canonical_x(params.g)?;
    let (c_orbital, _) = canonical_x(0.0)?;
    let g_total = gc_x(params.g)?;
    let g_orbital = gc_x(0.0)?;
    Ok(BoxSusceptibilities {
        canonical: SusceptibilityBreakdown::new(c_orbital, c_total - c_orbital, Provenance::Oracle),
        grand_canonical: SusceptibilityBreakdown::new(g_orbital, g_total - g_orbital, Provenance::Oracle),
        magnetization,
        darwin_fowler,
        particles,
        step: h,
    })
}

/// One box of an ensemble-equivalence sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceRow {
    pub side_length: f64,
    pub points_per_side: usize,
    pub particles: usize,
    pub f_canonical: f64,
    pub p_star: f64,
    /// |F_L − P*_L|.
    pub gap: f64,
    /// 2·ln(N)/(2β|Λ|) + |saddle-point correction|.
    pub gap_bound: f64,
    pub x_canonical: f64,
    pub x_gc_fixed_density: f64,
    /// |X_C − X_GC|.
    pub x_gap: f64,
}

/// Canonical versus grand-canonical quantities on a sequence of boxes at density ρ.
///
/// Each box holds N = ρL³ particles, which must be an integer to 10⁻⁹.
pub fn ensemble_equivalence_study(
    boxes: &[(f64, usize)],
    params: &ThermoParams,
    potential: &PeriodicPotential,
    step: &BoxFieldStep,
    options: &EigenOptions,
) -> Result<Vec<EquivalenceRow>> {
    let mut rows = Vec::with_capacity(boxes.len());
    for &(side, n) in boxes {
        let grid = BoxDiscretization::new(side, n)?;
        let exact = params.rho * grid.volume();
        let particles = exact.round();
        if (exact - particles).abs() > 1e-9 * exact.max(1.0) || particles < 1.0 {
            return Err(domain(format!(
                "rho * L^3 = {exact} is not a positive integer for L = {side}"
            )));
        }
        let s = box_susceptibilities(&grid, params, potential, particles as usize, step, options)?;
        let df = s.darwin_fowler;
        rows.push(EquivalenceRow {
            side_length: side,
            points_per_side: n,
            particles: particles as usize,
            f_canonical: df.f_canonical,
            p_star: df.p_star,
            gap: df.gap.abs(),
            gap_bound: df.bound,
            x_canonical: s.canonical.total,
            x_gc_fixed_density: s.grand_canonical.total,
            x_gap: (s.canonical.total - s.grand_canonical.total).abs(),
        });
    }
    Ok(rows)
}

