//! Leading-order semiclassical density, fugacity and zero-field susceptibility
//! of the spin-½ Fermi gas in a periodic potential.

use crate::error::{domain, Error, Result};
use crate::fermi_dirac::{f_nu, FermiOrder};
use crate::potentials::{CellGrid, CellQuadrature, PeriodicPotential, CELL_MEASURE};
use std::f64::consts::PI;

/// Ensemble parameters in units m = 1, k_B absorbed into β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoParams {
    /// Inverse temperature β > 0.
    pub beta: f64,
    /// Total particle density ρ > 0.
    pub rho: f64,
    /// Density of the spin branch carrying −għb/4.
    pub rho_minus: f64,
    /// Density of the spin branch carrying +għb/4.
    pub rho_plus: f64,
    /// Semiclassical parameter ħ ∈ (0, 1].
    pub hbar: f64,
    /// Landé factor g ≤ 2.
    pub g: f64,
    /// Charge q ≠ 0.
    pub q: f64,
    /// Speed of light c > 0.
    pub c: f64,
    /// Cyclotron frequency b = (q/c)B.
    pub b: f64,
    /// Allows ρ⁻ ≠ ρ⁺ and then solves one fugacity per branch.
    pub allow_spin_imbalance: bool,
}

impl ThermoParams {
    /// Parameters with the electron defaults g = 2, q = c = 1, b = 0 and ρ⁻ = ρ⁺ = ρ/2.
    pub fn new(beta: f64, rho: f64, hbar: f64) -> Self {
        Self {
            beta,
            rho,
            rho_minus: 0.5 * rho,
            rho_plus: 0.5 * rho,
            hbar,
            g: 2.0,
            q: 1.0,
            c: 1.0,
            b: 0.0,
            allow_spin_imbalance: false,
        }
    }

    /// Returns a copy with a different Landé factor.
    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Returns a copy with a different ħ.
    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    /// Returns a copy with a different total density, split evenly between spins.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self.rho_minus = 0.5 * rho;
        self.rho_plus = 0.5 * rho;
        self
    }

    /// Returns a copy with a different β.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Returns a copy with a different cyclotron frequency.
    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    /// Returns a copy with charge q and light speed c.
    pub fn with_charge(mut self, q: f64, c: f64) -> Self {
        self.q = q;
        self.c = c;
        self
    }

    /// Checks every field invariant.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            problems.push(format!("beta must be positive (got {})", self.beta));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            problems.push(format!("rho must be positive (got {})", self.rho));
        }
        if !(self.rho_minus >= 0.0 && self.rho_plus >= 0.0) {
            problems.push("spin densities must be non-negative".to_string());
        }
        if ((self.rho_minus + self.rho_plus) - self.rho).abs() > 1e-12 * self.rho.abs() {
            problems.push("rho_minus + rho_plus must equal rho".to_string());
        }
        if !(self.hbar > 0.0 && self.hbar <= 1.0) {
            problems.push(format!("hbar must lie in (0, 1] (got {})", self.hbar));
        }
        if !(self.g <= 2.0) {
            problems.push(format!("g must not exceed 2 (got {})", self.g));
        }
        if !(self.q != 0.0 && self.q.is_finite()) {
            problems.push("q must be non-zero".to_string());
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            problems.push("c must be positive".to_string());
        }
        if !self.b.is_finite() {
            problems.push("b must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(domain(problems.join("; ")))
        }
    }
}

/// Origin of a susceptibility value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    LeadingTerm,
    F12Formula,
    Oracle,
}

/// Orbital and spin parts of a susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityBreakdown {
    pub orbital: f64,
    pub spin: f64,
    pub total: f64,
    pub provenance: Provenance,
}

impl SusceptibilityBreakdown {
    /// Builds a breakdown with total = orbital + spin.
    pub fn new(orbital: f64, spin: f64, provenance: Provenance) -> Self {
        Self {
            orbital,
            spin,
            total: orbital + spin,
            provenance,
        }
    }
}

/// Cell quadrature and Boltzmann integral for one (β, V) pair.
///
/// Building the model samples V once; every density or susceptibility
/// evaluation afterwards is a weighted sum over the cached nodes.
#[derive(Debug, Clone)]
pub struct SemiclassicalModel {
    params: ThermoParams,
    grid: CellGrid,
    boltzmann: f64,
}

impl SemiclassicalModel {
    /// Samples V on a converged tensor rule for ∫_Ω e^{−βV}.
    pub fn new(params: ThermoParams, potential: &PeriodicPotential, quad: &CellQuadrature) -> Result<Self> {
        params.validate()?;
        let beta = params.beta;
        let (grid, boltzmann) = CellGrid::converged(potential, quad, |v| (-beta * v).exp())?;
        Ok(Self {
            params,
            grid,
            boltzmann,
        })
    }

    /// Parameters the model was built with.
    pub fn params(&self) -> &ThermoParams {
        &self.params
    }

    /// The same cached grid with a different ħ (V and β unchanged).
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        let params = self.params.with_hbar(hbar);
        params.validate()?;
        Ok(Self {
            params,
            grid: self.grid.clone(),
            boltzmann: self.boltzmann,
        })
    }

    /// The same cached grid with a different density.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        let mut params = self.params.with_rho(rho);
        params.allow_spin_imbalance = self.params.allow_spin_imbalance;
        params.validate()?;
        Ok(Self {
            params,
            grid: self.grid.clone(),
            boltzmann: self.boltzmann,
        })
    }

    /// ∫_Ω e^{−βV(x)} dx.
    pub fn boltzmann_integral(&self) -> f64 {
        self.boltzmann
    }

    fn fd_cell_integral(&self, order: FermiOrder, z: f64) -> Result<f64> {
        let beta = self.params.beta;
        let mut err = None;
        let value = self.grid.integrate(|v| match f_nu(order, z * (-beta * v).exp()) {
            Ok(f) => f,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    /// Density of one spin branch: (2πħ)⁻³|Ω|⁻¹(2π/β)^{3/2} ∫_Ω f_{3/2}(z e^{−βV}).
    pub fn branch_density(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(domain(format!("fugacity must be positive, got {z}")));
        }
        let p = &self.params;
        let prefactor = (2.0 * PI / p.beta).powf(1.5) / ((2.0 * PI * p.hbar).powi(3) * CELL_MEASURE);
        Ok(prefactor * self.fd_cell_integral(FermiOrder::THREE_HALVES, z)?)
    }

    /// Total density of both spin branches at a common fugacity.
    pub fn density(&self, z: f64) -> Result<f64> {
        Ok(2.0 * self.branch_density(z)?)
    }

    /// ½ρ|Ω|(2πβ)^{3/2}ħ³ / ∫_Ω e^{−βV}.
    pub fn leading_fugacity(&self) -> f64 {
        let p = &self.params;
        0.5 * p.rho * CELL_MEASURE * (2.0 * PI * p.beta).powf(1.5) * p.hbar.powi(3) / self.boltzmann
    }

    /// Solves density(z) = target with the map u ↦ target·u/density(u).
    ///
    /// `branch` selects the single-branch density model instead of the total.
    /// Falls back to a bracketed search on [0, 10 z₀] when the iteration stalls or
    /// contracts too slowly to meet `tol` within `max_iter`.
    fn solve(&self, target: f64, branch: bool, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
        if !(target > 0.0) {
            return Err(domain(format!("density must be positive, got {target}")));
        }
        if !(tol > 0.0) {
            return Err(domain("tolerance must be positive"));
        }
        let model = |z: f64| if branch { self.branch_density(z) } else { self.density(z) };
        let scale = if branch { 2.0 * target / self.params.rho } else { target / self.params.rho };
        let z0 = self.leading_fugacity() * scale;
        let mut u = z0;
        let mut best = f64::INFINITY;
        let mut stalls = 0;
        for iter in 1..=max_iter {
            let d = model(u)?;
            let residual = (d - target).abs();
            if residual <= tol * target {
                return Ok((u, iter - 1));
            }
            if residual < 0.5 * best {
                stalls = 0;
            } else {
                stalls += 1;
            }
            // A slow monotone contraction that cannot reach tol within the budget also falls back.
            let rate = residual / best;
            let remaining = (max_iter - iter) as i32;
            let hopeless = best.is_finite() && rate < 1.0 && residual * rate.powi(remaining) > tol * target;
            best = best.min(residual);
            if stalls >= 3 || hopeless || !d.is_finite() || d <= 0.0 {
                return self.bisect(&model, target, z0, tol, iter);
            }
            u = target * u / d;
        }
        let d = model(u)?;
        let residual = (d - target).abs();
        if residual <= tol * target {
            Ok((u, max_iter))
        } else {
            Err(Error::Convergence {
                iterations: max_iter,
                last: u,
                residual: residual / target,
            })
        }
    }

    fn bisect(
        &self,
        model: &dyn Fn(f64) -> Result<f64>,
        target: f64,
        z0: f64,
        tol: f64,
        spent: usize,
    ) -> Result<(f64, usize)> {
        let mut lo = 0.0;
        let mut hi = 10.0 * z0;
        let mut guard = 0;
        while model(hi)? < target {
            lo = hi;
            hi *= 10.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::Convergence {
                    iterations: spent + guard,
                    last: hi,
                    residual: f64::NAN,
                });
            }
        }
        let mut iterations = spent + guard;
        // Illinois false position on the residual, with a midpoint step whenever
        // the bracket fails to shrink by half.
        let mut f_lo = -target;
        let mut f_hi = model(hi)? - target;
        let mut side = 0i8;
        let mut width = 2.0 * (hi - lo);
        for _ in 0..300 {
            iterations += 1;
            let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            let mid = if secant.is_finite() && secant > lo && secant < hi && hi - lo <= 0.5 * width {
                secant
            } else {
                0.5 * (lo + hi)
            };
            width = hi - lo;
            let d = model(mid)?;
            let f = d - target;
            if f.abs() <= tol * target {
                return Ok((mid, iterations));
            }
            if f < 0.0 {
                lo = mid;
                f_lo = f;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = mid;
                f_hi = f;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
            if hi - lo <= f64::EPSILON * hi {
                return Err(Error::Convergence {
                    iterations,
                    last: mid,
                    residual: f.abs() / target,
                });
            }
        }
        Err(Error::Convergence {
            iterations,
            last: 0.5 * (lo + hi),
            residual: f64::NAN,
        })
    }

    /// z̄ with |density(z̄) − ρ| ≤ tol·ρ, and the number of map applications used.
    pub fn fugacity_fixed_point(&self, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
        self.solve(self.params.rho, false, tol, max_iter)
    }

    /// Fugacity of one branch at branch density `rho_s`.
    pub fn branch_fugacity(&self, rho_s: f64, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
        self.solve(rho_s, true, tol, max_iter)
    }

    /// Susceptibility from the f_{1/2} formulas at common fugacity z, both branches.
    pub fn susceptibility_f12(&self, z: f64) -> Result<SusceptibilityBreakdown> {
        if !(z > 0.0) {
            return Err(domain(format!("fugacity must be positive, got {z}")));
        }
        let p = &self.params;
        let integral = self.fd_cell_integral(FermiOrder::HALF, z)?;
        let common = (p.q / p.c).powi(2) / (p.beta.sqrt() * CELL_MEASURE * p.hbar) / (2.0 * PI).powf(1.5);
        let orbital = -common / 6.0 * integral;
        let spin = common * (p.g * p.g / 4.0) / 2.0 * integral;
        Ok(SusceptibilityBreakdown::new(orbital, spin, Provenance::F12Formula))
    }

    /// Susceptibility at the model's density: z̄ from the fixed point, then the f_{1/2} formulas.
    ///
    /// With ρ⁻ ≠ ρ⁺ (only when allowed) each branch gets its own fugacity and
    /// contributes half of the two-branch formula.
    pub fn susceptibility_at_density(&self, tol: f64, max_iter: usize) -> Result<SusceptibilityBreakdown> {
        let p = &self.params;
        if (p.rho_minus - p.rho_plus).abs() > 1e-14 * p.rho {
            if !p.allow_spin_imbalance {
                return Err(domain(
                    "rho_minus != rho_plus; set allow_spin_imbalance for the two-fugacity variant",
                ));
            }
            let mut orbital = 0.0;
            let mut spin = 0.0;
            for rho_s in [p.rho_minus, p.rho_plus] {
                if rho_s == 0.0 {
                    continue;
                }
                let (z, _) = self.branch_fugacity(rho_s, tol, max_iter)?;
                let x = self.susceptibility_f12(z)?;
                orbital += 0.5 * x.orbital;
                spin += 0.5 * x.spin;
            }
            return Ok(SusceptibilityBreakdown::new(orbital, spin, Provenance::F12Formula));
        }
        let (z, _) = self.fugacity_fixed_point(tol, max_iter)?;
        self.susceptibility_f12(z)
    }
}

/// Leading-order total density 2(2πħ)⁻³|Ω|⁻¹(2π/β)^{3/2}∫_Ω f_{3/2}(z e^{−βV}).
pub fn bulk_density_semiclassical(params: &ThermoParams, z: f64, potential: &PeriodicPotential) -> Result<f64> {
    SemiclassicalModel::new(*params, potential, &CellQuadrature::default())?.density(z)
}

/// Fixed-point fugacity z̄ and iteration count at the parameters' density.
pub fn fugacity_fixed_point(
    params: &ThermoParams,
    potential: &PeriodicPotential,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    SemiclassicalModel::new(*params, potential, &CellQuadrature::default())?.fugacity_fixed_point(tol, max_iter)
}

/// ½ρ|Ω|(2πβ)^{3/2}(∫_Ω e^{−βV})⁻¹ħ³.
pub fn fugacity_leading_closed_form(params: &ThermoParams, potential: &PeriodicPotential) -> Result<f64> {
    Ok(SemiclassicalModel::new(*params, potential, &CellQuadrature::default())?.leading_fugacity())
}

/// The f_{1/2} susceptibility formulas at fugacity z.
pub fn susceptibility_f12(params: &ThermoParams, z: f64, potential: &PeriodicPotential) -> Result<SusceptibilityBreakdown> {
    SemiclassicalModel::new(*params, potential, &CellQuadrature::default())?.susceptibility_f12(z)
}

/// Orbital −(1/3)(q/2c)²ρβħ², spin (g²/4)(q/2c)²ρβħ².
pub fn susceptibility_leading_terms(params: &ThermoParams) -> SusceptibilityBreakdown {
    let k = (params.q / (2.0 * params.c)).powi(2) * params.rho * params.beta * params.hbar * params.hbar;
    SusceptibilityBreakdown::new(-k / 3.0, params.g * params.g / 4.0 * k, Provenance::LeadingTerm)
}

/// Default fixed-point tolerance used by [`susceptibility_at_density`].
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-12;
/// Default fixed-point iteration budget.
pub const DEFAULT_FIXED_POINT_ITER: usize = 30;

/// Fixed point followed by the f_{1/2} formulas.
pub fn susceptibility_at_density(params: &ThermoParams, potential: &PeriodicPotential) -> Result<SusceptibilityBreakdown> {
    SemiclassicalModel::new(*params, potential, &CellQuadrature::default())?
        .susceptibility_at_density(DEFAULT_FIXED_POINT_TOL, DEFAULT_FIXED_POINT_ITER)
}

/// Fitted power law of |X(ħ) − leading(ħ)|.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    /// Least-squares slope of log|gap| against log ħ, or +∞ when a gap vanishes.
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// (ħ, gap) pairs used.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

/// Slope of log|X(ħ) − leading(ħ)| against log ħ over a decreasing ħ grid.
pub fn remainder_slope_study<F>(hbar_grid: &[f64], params: &ThermoParams, oracle: F) -> Result<SlopeEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    if hbar_grid.len() < 3 {
        return Err(domain("remainder slope study needs at least three hbar values"));
    }
    if hbar_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain("hbar grid must be strictly decreasing"));
    }
    let mut points = Vec::with_capacity(hbar_grid.len());
    for &h in hbar_grid {
        let x = oracle(h)?;
        let lead = susceptibility_leading_terms(&params.with_hbar(h)).total;
        points.push((h, (x - lead).abs()));
    }
    if points.iter().any(|p| p.1 == 0.0) {
        return Ok(SlopeEstimate {
            slope: f64::INFINITY,
            residual: 0.0,
            points,
        });
    }
    let (slope, residual) = loglog_slope(&points);
    Ok(SlopeEstimate {
        slope,
        residual,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_terms_electron_value() {
        let x = susceptibility_leading_terms(&ThermoParams::new(1.0, 1.0, 1.0));
        assert!((x.total - 1.0 / 6.0).abs() < 1e-15);
        let y = susceptibility_leading_terms(&ThermoParams::new(1.0, 1.0, 1.0).with_g(2.0 / 3f64.sqrt()));
        assert!(y.total.abs() < 1e-15);
    }

    #[test]
    fn closed_form_fugacity_at_unit_hbar() {
        let z = fugacity_leading_closed_form(&ThermoParams::new(1.0, 1.0, 1.0), &PeriodicPotential::zero()).unwrap();
        assert!((z - 0.5 * (2.0 * PI).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ThermoParams::new(-1.0, 1.0, 0.1).validate().is_err());
        assert!(ThermoParams::new(1.0, 1.0, 1.5).validate().is_err());
        assert!(ThermoParams::new(1.0, 1.0, 0.1).with_g(2.5).validate().is_err());
    }

    #[test]
    fn slope_sentinel_for_leading_oracle() {
        let p = ThermoParams::new(1.0, 1.0, 0.1);
        let est = remainder_slope_study(&[0.2, 0.1, 0.05], &p, |h| {
            Ok(susceptibility_leading_terms(&p.with_hbar(h)).total)
        })
        .unwrap();
        assert_eq!(est.slope, f64::INFINITY);
    }

    #[test]
    fn imbalance_requires_flag() {
        let mut p = ThermoParams::new(1.0, 1.0, 0.1);
        p.rho_minus = 0.3;
        p.rho_plus = 0.7;
        let m = SemiclassicalModel::new(p, &PeriodicPotential::zero(), &CellQuadrature::default()).unwrap();
        assert!(m.susceptibility_at_density(1e-12, 30).is_err());
        p.allow_spin_imbalance = true;
        let m = SemiclassicalModel::new(p, &PeriodicPotential::zero(), &CellQuadrature::default()).unwrap();
        let x = m.susceptibility_at_density(1e-12, 30).unwrap();
        assert!(x.orbital < 0.0 && x.spin > 0.0);
    }
}
