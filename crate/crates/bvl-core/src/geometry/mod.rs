//! Partitions of unity on the dilated cell, constant-potential Green
//! functions, the approximation kernel, the Fermi contour and the
//! closed-form kernel integrals used in the semiclassical expansion.
//!
//! Positions here live in the dilated cell Ω_ħ = ħ⁻¹Ω = (−1/(2ħ), 1/(2ħ))³.
//! A cube C(γ, r) is centred at γ with side r, so half-width r/2.

mod contour;
mod green;
mod kernels;

pub use contour::{build_contour, contour_fermi_check, contour_winding_check, fermi_factor, ContourSpec};
pub use green::{green_constant_potential, holder_gap_study, script_r_kernel, HolderGapStudy};
pub use kernels::{
    orbital_kernel_components, spin_kernel_monte_carlo, verify_orbital_kernel_integral, verify_spin_kernel_integral, KernelCheck,
    KernelQuadrature,
};

use crate::error::{Error, Result};
use crate::potentials::Point;

/// How strictly ħ is checked against the cutoff construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Admissibility {
    /// C(0, 69ħ^{−α}) must fit strictly inside Ω_ħ, i.e. ħ < 69^{−1/(1−α)}.
    #[default]
    Strict,
    /// Only ħ < 1 is required; the partition of unity is still exact.
    Relaxed,
}

impl Admissibility {
    /// Largest admissible ħ (exclusive).
    pub fn limit(self, alpha: f64) -> f64 {
        match self {
            Admissibility::Strict => 69f64.powf(-1.0 / (1.0 - alpha)),
            Admissibility::Relaxed => 1.0,
        }
    }
}

/// Standard mollifier e^{−1/(1−t²)} on |t| < 1.
pub fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn smooth_edge(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for u ≤ 0, 1 for u ≥ 1, C^∞ in between.
pub fn smooth_step(u: f64) -> f64 {
    let a = smooth_edge(u);
    let b = smooth_edge(1.0 - u);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// One-dimensional plateau: 1 on |t| ≤ inner, 0 on |t| ≥ outer.
fn plateau(t: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - t.abs()) / (outer - inner))
}

/// Half-widths (in units of the scale s = ħ^{−α}) of the plateau and support of τ̂.
pub const HAT_PLATEAU: (f64, f64) = (1.5, 2.0);
/// Half-widths (in units of s) of the plateau and support of τ̂̂.
pub const DOUBLE_HAT_PLATEAU: (f64, f64) = (2.5, 3.0);

/// The three cutoff families τ, τ̂, τ̂̂ on Ω_ħ, evaluated lazily.
///
/// Centres are γ = s·k with s = ħ^{−α} and k ∈ ℤ³, |k_i| ≤ K, where K is the
/// largest index whose bump reaches into Ω_ħ. The partition τ is the tensor
/// product of the normalized one-dimensional bumps, so Σ_γ τ_γ = 1 on Ω_ħ.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFamily {
    pub alpha: f64,
    pub hbar: f64,
    /// Lattice scale s = ħ^{−α}.
    pub scale: f64,
    /// Largest index K per axis.
    pub max_index: i64,
    pub admissibility: Admissibility,
}

/// Builds the cutoff family after the admissibility check.
pub fn build_cutoff_family(alpha: f64, hbar: f64, admissibility: Admissibility) -> Result<CutoffFamily> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(crate::error::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(hbar > 0.0) {
        return Err(crate::error::domain(format!("hbar must be positive, got {hbar}")));
    }
    let limit = admissibility.limit(alpha);
    if !(hbar < limit) {
        return Err(Error::Admissibility { alpha, hbar, limit });
    }
    let reach = 1.0 + hbar.powf(alpha - 1.0) / 2.0;
    let mut max_index = reach.floor() as i64;
    if max_index as f64 == reach {
        max_index -= 1;
    }
    Ok(CutoffFamily {
        alpha,
        hbar,
        scale: hbar.powf(-alpha),
        max_index,
        admissibility,
    })
}

impl CutoffFamily {
    /// Half-width 1/(2ħ) of Ω_ħ.
    pub fn cell_half_width(&self) -> f64 {
        0.5 / self.hbar
    }

    /// Card(𝓔) = (2K + 1)³.
    pub fn center_count(&self) -> u64 {
        let side = (2 * self.max_index + 1) as u64;
        side.pow(3)
    }

    /// Centre γ = s·k.
    pub fn center(&self, k: [i64; 3]) -> Point {
        [k[0] as f64 * self.scale, k[1] as f64 * self.scale, k[2] as f64 * self.scale]
    }

    fn in_lattice(&self, k: [i64; 3]) -> bool {
        k.iter().all(|&ki| ki.abs() <= self.max_index)
    }

    fn axis_normalizer(&self, x: f64) -> f64 {
        let k0 = (x / self.scale).round() as i64;
        let mut total = 0.0;
        for k in (k0 - 2)..=(k0 + 2) {
            if k.abs() <= self.max_index {
                total += bump(x / self.scale - k as f64);
            }
        }
        total
    }

    fn axis_tau(&self, x: f64, k: i64) -> f64 {
        let raw = bump(x / self.scale - k as f64);
        if raw == 0.0 {
            return 0.0;
        }
        raw / self.axis_normalizer(x)
    }

    /// τ_{ħ,γ}(x), supported in C(γ, 2s).
    pub fn tau(&self, k: [i64; 3], x: Point) -> f64 {
        if !self.in_lattice(k) {
            return 0.0;
        }
        (0..3).map(|i| self.axis_tau(x[i], k[i])).product()
    }

    /// τ̂_{ħ,γ}(x): 1 on C(γ, 3s), supported in C(γ, 4s).
    pub fn tau_hat(&self, k: [i64; 3], x: Point) -> f64 {
        let (inner, outer) = HAT_PLATEAU;
        (0..3)
            .map(|i| plateau(x[i] / self.scale - k[i] as f64, inner, outer))
            .product()
    }

    /// τ̂̂_{ħ,γ}(x): 1 on C(γ, 5s), supported in C(γ, 6s).
    pub fn tau_double_hat(&self, k: [i64; 3], x: Point) -> f64 {
        let (inner, outer) = DOUBLE_HAT_PLATEAU;
        (0..3)
            .map(|i| plateau(x[i] / self.scale - k[i] as f64, inner, outer))
            .product()
    }

    /// Lattice indices whose τ may be nonzero at x.
    pub fn active_centers(&self, x: Point) -> Vec<[i64; 3]> {
        let around = |xi: f64| {
            let k0 = (xi / self.scale).round() as i64;
            ((k0 - 1)..=(k0 + 1)).filter(|k| k.abs() <= self.max_index).collect::<Vec<_>>()
        };
        let (a, b, c) = (around(x[0]), around(x[1]), around(x[2]));
        let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
        for &i in &a {
            for &j in &b {
                for &l in &c {
                    out.push([i, j, l]);
                }
            }
        }
        out
    }

    /// Σ_γ τ_γ(x).
    pub fn partition_sum(&self, x: Point) -> f64 {
        crate::quadrature::sum(self.active_centers(x).into_iter().map(|k| self.tau(k, x)))
    }
}

/// Worst deviations found on a sample of Ω_ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionResiduals {
    /// max |Σ_γ τ_γ − 1|.
    pub partition: f64,
    /// max |τ̂τ − τ|.
    pub hat_product: f64,
    /// max |τ̂̂τ̂ − τ̂|.
    pub double_hat_product: f64,
    /// Smallest and largest value seen over all families.
    pub range: (f64, f64),
}

/// Residuals of the partition and product identities on a `points`³ grid of Ω_ħ.
pub fn partition_residuals(family: &CutoffFamily, points: usize) -> PartitionResiduals {
    let half = family.cell_half_width();
    let coord = |i: usize| -half + (i as f64 + 0.5) * 2.0 * half / points as f64;
    let mut out = PartitionResiduals {
        partition: 0.0,
        hat_product: 0.0,
        double_hat_product: 0.0,
        range: (f64::INFINITY, f64::NEG_INFINITY),
    };
    for i in 0..points {
        for j in 0..points {
            for l in 0..points {
                let x = [coord(i), coord(j), coord(l)];
                out.partition = out.partition.max((family.partition_sum(x) - 1.0).abs());
                for k in family.active_centers(x) {
                    let t = family.tau(k, x);
                    let th = family.tau_hat(k, x);
                    let thh = family.tau_double_hat(k, x);
                    out.hat_product = out.hat_product.max((th * t - t).abs());
                    out.double_hat_product = out.double_hat_product.max((thh * th - th).abs());
                    for v in [t, th, thh] {
                        out.range.0 = out.range.0.min(v);
                        out.range.1 = out.range.1.max(v);
                    }
                }
            }
        }
    }
    out
}

/// Multi-index s = (s₁, s₂, s₃) of a partial derivative.
pub type MultiIndex = [u32; 3];

/// Derivative of order 0, 1 or 2 of a one-dimensional profile by central differences.
fn profile_derivative(f: &dyn Fn(f64) -> f64, x: f64, order: u32, h: f64) -> f64 {
    match order {
        0 => f(x),
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        _ => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
    }
}

/// Diagnostics of ‖D^s τ̂‖∞ on one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBound {
    /// max_γ ‖D^s τ̂_γ‖∞ · ħ^{−|s|α}.
    pub ratio: f64,
    /// Sup-norm distance from Supp D^s τ̂_γ to Supp τ_γ, in physical units.
    pub support_distance: f64,
    /// support_distance · ħ^{α}.
    pub support_constant: f64,
}

/// Sup norm of D^s τ̂ on a fine grid, scaled by ħ^{−|s|α}, and the support gap.
///
/// The grid spacing is s/`resolution` along each axis; derivatives are central
/// differences of the constructed profile in physical coordinates. Because the
/// family is a tensor product, the sup of D^s τ̂ is the product of the
/// per-axis sups.
pub fn derivative_bound_check(family: &CutoffFamily, order: MultiIndex, resolution: usize) -> Result<DerivativeBound> {
    if order.iter().sum::<u32>() > 2 || order.iter().any(|&o| o > 2) {
        return Err(crate::error::domain("derivative order |s| must be at most 2"));
    }
    let resolution = resolution.max(100);
    let s = family.scale;
    let (inner, outer) = HAT_PLATEAU;
    let profile = move |x: f64| plateau(x / s, inner, outer);
    let h = s / resolution as f64 * 0.25;
    let points = (2.5 * resolution as f64) as usize;
    let mut sup = [0.0f64; 3];
    let mut first_nonzero = f64::INFINITY;
    for idx in 0..=points {
        let x = idx as f64 * s / resolution as f64;
        for axis in 0..3 {
            let d = profile_derivative(&profile, x, order[axis], h).abs();
            sup[axis] = sup[axis].max(d);
        }
        let varying = order.iter().any(|&o| o > 0);
        if varying {
            let d: f64 = order
                .iter()
                .filter(|&&o| o > 0)
                .map(|&o| profile_derivative(&profile, x, o, h).abs())
                .fold(f64::INFINITY, f64::min);
            if d > 0.0 && x < first_nonzero {
                first_nonzero = x;
            }
        }
    }
    let total_order: u32 = order.iter().sum();
    let ratio = sup.iter().product::<f64>() * family.hbar.powf(-(total_order as f64) * family.alpha);
    let support_distance = if total_order == 0 {
        (inner - 1.0) * s
    } else {
        (first_nonzero - h) - s
    };
    Ok(DerivativeBound {
        ratio,
        support_distance,
        support_constant: support_distance / s,
    })
}
