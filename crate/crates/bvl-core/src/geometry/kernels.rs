//! Closed-form kernel integrals behind the orbital and spin leading terms,
//! checked against independent quadratures.

use super::green::decay_rate;
use crate::error::{domain, Result};
use crate::quadrature::{composite_nodes, gauss_legendre};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Tensor quadrature used by the kernel checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Composite Gauss–Legendre panels along the radial (or momentum) axis.
    pub radial_panels: usize,
    /// Gauss–Legendre degree per panel.
    pub degree: usize,
    /// Nodes in the polar angle; the azimuth uses twice as many.
    pub angular: usize,
    /// Radial window in units of the decay length 1/Re(rate).
    pub reach: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        Self {
            radial_panels: 48,
            degree: 20,
            angular: 16,
            reach: 60.0,
        }
    }
}

impl KernelQuadrature {
    fn validate(&self) -> Result<()> {
        if self.radial_panels == 0 || self.degree < 2 || self.angular < 2 || !(self.reach > 0.0) {
            return Err(domain("kernel quadrature needs panels >= 1, degree >= 2, angular >= 2, reach > 0"));
        }
        Ok(())
    }
}

/// Quadrature value, closed form and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_gap: f64,
}

impl KernelCheck {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        Self {
            lhs,
            rhs,
            relative_gap: (lhs - rhs).norm() / rhs.norm(),
        }
    }
}

/// The (w₁², w₂²) parts of ∫ e^{−2ς′|w|}|w|⁻²(w₁² + w₂²) d³w, ς′ = ħ⁻¹√(−2(ξ − v)),
/// by a spherical tensor quadrature.
pub fn orbital_kernel_components(
    xi: Complex64,
    v_x: f64,
    hbar: f64,
    quad: &KernelQuadrature,
) -> Result<(Complex64, Complex64)> {
    quad.validate()?;
    if !(hbar > 0.0) {
        return Err(domain("hbar must be positive"));
    }
    let rate = 2.0 * decay_rate(xi, v_x)? / hbar;
    let radial = composite_nodes(0.0, quad.reach / rate.re, quad.radial_panels, quad.degree);
    let polar: Vec<(f64, f64)> = gauss_legendre(quad.angular).mapped(0.0, PI).collect();
    let azimuth: Vec<(f64, f64)> = gauss_legendre(2 * quad.angular).mapped(0.0, 2.0 * PI).collect();
    let parts: Vec<(Complex64, Complex64)> = radial
        .par_iter()
        .map(|&(r, wr)| {
            let radial_weight = (-rate * r).exp() * (wr * r * r);
            let mut p1 = Complex64::new(0.0, 0.0);
            let mut p2 = Complex64::new(0.0, 0.0);
            for &(theta, wt) in &polar {
                let st = theta.sin();
                for &(phi, wp) in &azimuth {
                    let w = wt * wp * st;
                    let w1 = st * phi.cos();
                    let w2 = st * phi.sin();
                    p1 += radial_weight * (w * w1 * w1);
                    p2 += radial_weight * (w * w2 * w2);
                }
            }
            (p1, p2)
        })
        .collect();
    Ok(parts
        .iter()
        .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |a, b| (a.0 + b.0, a.1 + b.1)))
}

/// Orbital kernel integral against 2π·(4/3)·ħ³/(8√2(−(ξ − v))^{3/2}).
pub fn verify_orbital_kernel_integral(
    xi: Complex64,
    v_x: f64,
    hbar: f64,
    quad: &KernelQuadrature,
) -> Result<KernelCheck> {
    let (p1, p2) = orbital_kernel_components(xi, v_x, hbar, quad)?;
    let a = -(xi - v_x);
    let rhs = 2.0 * PI * (4.0 / 3.0) * hbar.powi(3) / (8.0 * 2f64.sqrt() * a.powf(1.5));
    Ok(KernelCheck::new(p1 + p2, rhs))
}

/// Spin kernel ∫∫ ∏_{l=0}^{2} e^{−κ|z_l − z_{l+1}|}/|z_l − z_{l+1}| dz₁dz₂ (z₃ = z₀),
/// κ = ħ⁻¹√(−2(ξ − v)), against √π(2π)^{3/2}ħ³/(4(−(ξ − v))^{3/2}).
///
/// The closed cycle of three Yukawa factors is a convolution, so its value is
/// (2π)⁻³∫(4π/(k² + κ²))³ d³k, integrated radially after the map k = |κ|t/(1 − t).
pub fn verify_spin_kernel_integral(
    xi: Complex64,
    v_x: f64,
    hbar: f64,
    quad: &KernelQuadrature,
) -> Result<KernelCheck> {
    quad.validate()?;
    if !(hbar > 0.0) {
        return Err(domain("hbar must be positive"));
    }
    let kappa = decay_rate(xi, v_x)? / hbar;
    let k2 = kappa * kappa;
    let scale = kappa.norm();
    let nodes = composite_nodes(0.0, 1.0, quad.radial_panels, quad.degree);
    let radial: Complex64 = nodes
        .iter()
        .map(|&(t, w)| {
            let k = scale * t / (1.0 - t);
            let jac = scale / (1.0 - t).powi(2);
            let yukawa = 4.0 * PI / (k * k + k2);
            yukawa.powi(3) * (w * jac * k * k)
        })
        .sum();
    let lhs = radial * (4.0 * PI / (2.0 * PI).powi(3));
    let a = -(xi - v_x);
    let rhs = PI.sqrt() * (2.0 * PI).powf(1.5) * hbar.powi(3) / (4.0 * a.powf(1.5));
    Ok(KernelCheck::new(lhs, rhs))
}

/// Direct six-dimensional Monte Carlo estimate of the spin kernel for real ξ < v.
///
/// z₁ − z₀ and z₂ − z₁ are drawn from the density κ²e^{−κr}/(4πr), whose
/// radial part is a Gamma(2, 1/κ) law, leaving the weight 16π²e^{−κr₃}/(κ⁴r₃).
/// Returns (mean, standard error).
pub fn spin_kernel_monte_carlo(xi: f64, v_x: f64, hbar: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if !(xi < v_x) {
        return Err(domain("Monte Carlo kernel needs real xi below v"));
    }
    if samples < 2 {
        return Err(domain("Monte Carlo needs at least two samples"));
    }
    let kappa = (2.0 * (v_x - xi)).sqrt() / hbar;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = |rng: &mut ChaCha8Rng| -> [f64; 3] {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = 1.0 - rng.random::<f64>();
        let r = -(u1.ln() + u2.ln()) / kappa;
        let cos_t: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        [r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * cos_t]
    };
    let prefactor = 16.0 * PI * PI / kappa.powi(4);
    let mut s = crate::quadrature::KahanSum::default();
    let mut s2 = crate::quadrature::KahanSum::default();
    for _ in 0..samples {
        let a = step(&mut rng);
        let b = step(&mut rng);
        let r3 = ((a[0] + b[0]).powi(2) + (a[1] + b[1]).powi(2) + (a[2] + b[2]).powi(2)).sqrt();
        let w = prefactor * (-kappa * r3).exp() / r3;
        s.add(w);
        s2.add(w * w);
    }
    let n = samples as f64;
    let mean = s.value() / n;
    let var = (s2.value() / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
