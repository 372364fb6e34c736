//! The contour 𝒞_β enclosing the spectrum and the scalar Fermi-factor
//! representation it supports.

use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Closed rectangle traversed counterclockwise: the rays Im ξ = ±π/(2β)
/// between Re ξ = δ and Re ξ = δ + truncation, joined by vertical sides.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub beta: f64,
    /// δ = −‖V‖∞ − 1.
    pub delta: f64,
    /// Length of the horizontal sides.
    pub truncation: f64,
    /// π/(2β).
    pub half_height: f64,
    /// (ξ_m, w_m) with ∮ f dξ ≈ Σ w_m f(ξ_m); the weights include dξ/dt.
    pub nodes: Vec<(Complex64, Complex64)>,
}

const PANEL_DEGREE: usize = 16;

fn segment(a: Complex64, b: Complex64, panels: usize, out: &mut Vec<(Complex64, Complex64)>) {
    let rule = gauss_legendre(PANEL_DEGREE);
    let d = (b - a) / panels as f64;
    for p in 0..panels {
        let start = a + d * p as f64;
        for (t, w) in rule.mapped(0.0, 1.0) {
            out.push((start + d * t, d * w));
        }
    }
}

/// Builds 𝒞_β with about `nodes` Gauss–Legendre nodes spread by side length.
///
/// `truncation = None` uses 40/β. The contour stays in |Im ξ| < π/β, where
/// the Fermi factor is analytic.
pub fn build_contour(beta: f64, sup_norm_v: f64, truncation: Option<f64>, nodes: usize) -> Result<ContourSpec> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    if !(sup_norm_v >= 0.0 && sup_norm_v.is_finite()) {
        return Err(domain("sup norm must be finite and non-negative"));
    }
    let truncation = truncation.unwrap_or(40.0 / beta);
    if !(truncation > 0.0) {
        return Err(domain("truncation must be positive"));
    }
    let delta = -sup_norm_v - 1.0;
    let eta = PI / (2.0 * beta);
    let right = delta + truncation;
    let perimeter = 2.0 * truncation + 4.0 * eta;
    let panels_for = |len: f64| (((nodes.max(64) as f64) * len / perimeter / PANEL_DEGREE as f64).ceil() as usize).max(1);
    let corners = [
        Complex64::new(delta, -eta),
        Complex64::new(right, -eta),
        Complex64::new(right, eta),
        Complex64::new(delta, eta),
    ];
    let mut list = Vec::with_capacity(nodes + 4 * PANEL_DEGREE);
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        segment(a, b, panels_for((b - a).norm()), &mut list);
    }
    Ok(ContourSpec {
        beta,
        delta,
        truncation,
        half_height: eta,
        nodes: list,
    })
}

impl ContourSpec {
    /// ∮_{𝒞_β} f(ξ) dξ.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes.iter().map(|&(xi, w)| f(xi) * w).sum()
    }
}

/// 𝔣_FD(β, z; ξ) = z e^{−βξ}/(1 + z e^{−βξ}).
pub fn fermi_factor(beta: f64, z: f64, xi: Complex64) -> Complex64 {
    let e = (-beta * xi).exp() * z;
    e / (e + 1.0)
}

/// ∮ dξ/(ξ − λ); equals 2πi for δ < λ < δ + truncation.
pub fn contour_winding_check(contour: &ContourSpec, lambda: f64) -> Complex64 {
    contour.integrate(|xi| 1.0 / (xi - lambda))
}

/// (i/2π)∮ 𝔣_FD(β, z; ξ)(λ − ξ)⁻¹ dξ, which reproduces the Fermi factor at λ.
pub fn contour_fermi_check(contour: &ContourSpec, z: f64, lambda: f64) -> Complex64 {
    let beta = contour.beta;
    let integral = contour.integrate(|xi| fermi_factor(beta, z, xi) / (lambda - xi));
    Complex64::new(0.0, 1.0 / (2.0 * PI)) * integral
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_number_one() {
        let c = build_contour(1.0, 1.0, None, 2000).unwrap();
        let w = contour_winding_check(&c, 1.0);
        assert!((w - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-8);
    }

    #[test]
    fn fermi_factor_recovered() {
        let c = build_contour(2.0, 0.5, None, 3000).unwrap();
        let got = contour_fermi_check(&c, 0.3, 0.7);
        let want = fermi_factor(2.0, 0.3, Complex64::new(0.7, 0.0));
        assert!((got - want).norm() < 1e-8);
    }
}
