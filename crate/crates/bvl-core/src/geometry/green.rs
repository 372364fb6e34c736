//! Constant-potential Green function, the approximation kernel ℛ_ħ(ξ) and the
//! Hölder gap of the potential over the cutoff supports.

use super::{CutoffFamily, DOUBLE_HAT_PLATEAU};
use crate::error::{domain, Result};
use crate::potentials::{Point, PeriodicPotential};
use crate::semiclassics::{loglog_slope, SlopeEstimate};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn distance(x: Point, y: Point) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

/// ς = √(−2(ξ − v)) on the principal branch; ξ − v ∈ [0, ∞) is the cut.
pub(crate) fn decay_rate(xi: Complex64, v: f64) -> Result<Complex64> {
    let arg = -2.0 * (xi - v);
    if arg.im == 0.0 && arg.re <= 0.0 {
        return Err(domain(format!("xi = {xi} lies on the spectral cut [{v}, inf)")));
    }
    if !arg.re.is_finite() || !arg.im.is_finite() {
        return Err(domain("xi must be finite"));
    }
    Ok(arg.sqrt())
}

/// (2π)⁻¹ e^{−ς|x−y|}/|x−y|, the kernel of (−½Δ + v − ξ)⁻¹ on ℝ³.
pub fn green_constant_potential(x: Point, y: Point, xi: Complex64, v_gamma: f64) -> Result<Complex64> {
    let r = distance(x, y);
    if r == 0.0 {
        return Err(domain("Green function is singular at x = y"));
    }
    let sigma = decay_rate(xi, v_gamma)?;
    Ok((-sigma * r).exp() / (2.0 * PI * r))
}

/// Σ_γ τ̂_γ(x) G(x, y; ξ, V(ħ^{1−α}k)) τ_γ(y) over the centres active at y.
///
/// x and y are points of Ω_ħ; the potential is evaluated at the physical
/// position ħγ = ħ^{1−α}k of each centre.
pub fn script_r_kernel(
    family: &CutoffFamily,
    potential: &PeriodicPotential,
    x: Point,
    y: Point,
    xi: Complex64,
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for k in family.active_centers(y) {
        let t = family.tau(k, y);
        if t == 0.0 {
            continue;
        }
        let th = family.tau_hat(k, x);
        if th == 0.0 {
            continue;
        }
        let c = family.center(k);
        let v = potential.eval([family.hbar * c[0], family.hbar * c[1], family.hbar * c[2]])?;
        total += green_constant_potential(x, y, xi, v)? * (th * t);
    }
    Ok(total)
}

/// Largest gap |V(ħγ) − V(ħz)| over z ∈ Supp τ̂̂_γ, per ħ, with its log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderGapStudy {
    /// Fit of log(max gap) against log ħ, with the (ħ, max gap) pairs.
    pub slope: SlopeEstimate,
    /// θ(1 − α), the predicted slope.
    pub predicted: f64,
}

/// Samples `centers` lattice points per ħ and takes the largest gap over the
/// corners of each cube Supp τ̂̂_γ and the midpoints of its faces.
pub fn holder_gap_study(
    potential: &PeriodicPotential,
    alpha: f64,
    hbar_grid: &[f64],
    centers: usize,
    seed: u64,
) -> Result<HolderGapStudy> {
    if hbar_grid.len() < 2 {
        return Err(domain("Hölder gap study needs at least two hbar values"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let reach = DOUBLE_HAT_PLATEAU.1;
    let mut offsets = Vec::new();
    for a in [-1.0, 0.0, 1.0] {
        for b in [-1.0, 0.0, 1.0] {
            for c in [-1.0, 0.0, 1.0] {
                if a != 0.0 || b != 0.0 || c != 0.0 {
                    offsets.push([a * reach, b * reach, c * reach]);
                }
            }
        }
    }
    let mut points = Vec::with_capacity(hbar_grid.len());
    for (i, &hbar) in hbar_grid.iter().enumerate() {
        if !(hbar > 0.0 && hbar < 1.0) {
            return Err(domain(format!("hbar must lie in (0,1), got {hbar}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let s = hbar.powf(-alpha);
        let kmax = (0.5 / (hbar * s)).floor() as i64;
        let step = hbar * s;
        let mut worst: f64 = 0.0;
        for _ in 0..centers.max(1) {
            let k = [
                rng.random_range(-kmax..=kmax),
                rng.random_range(-kmax..=kmax),
                rng.random_range(-kmax..=kmax),
            ];
            let c = [k[0] as f64 * step, k[1] as f64 * step, k[2] as f64 * step];
            let v0 = potential.eval(c)?;
            for o in &offsets {
                let z = [c[0] + o[0] * step, c[1] + o[1] * step, c[2] + o[2] * step];
                worst = worst.max((v0 - potential.eval(z)?).abs());
            }
        }
        points.push((hbar, worst));
    }
    let (slope, residual) = loglog_slope(&points);
    Ok(HolderGapStudy {
        slope: SlopeEstimate { slope, residual, points },
        predicted: potential.theta * (1.0 - alpha),
    })
}
