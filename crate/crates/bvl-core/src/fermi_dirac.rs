//! Complete Fermi–Dirac functions f_ν(u) = Γ(ν)⁻¹ ∫₀^∞ t^{ν−1} u/(eᵗ + u) dt.

use crate::error::{domain, Error, Result};
use crate::quadrature::{composite, KahanSum};
use std::f64::consts::PI;

/// Order ν > 0 of a Fermi–Dirac function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiOrder {
    nu: f64,
}

impl FermiOrder {
    /// ν = ½.
    pub const HALF: Self = Self { nu: 0.5 };
    /// ν = 3⁄2.
    pub const THREE_HALVES: Self = Self { nu: 1.5 };
    /// ν = 5⁄2.
    pub const FIVE_HALVES: Self = Self { nu: 2.5 };

    /// Validated order.
    pub fn new(nu: f64) -> Result<Self> {
        if nu > 0.0 && nu.is_finite() {
            Ok(Self { nu })
        } else {
            Err(domain(format!("Fermi-Dirac order must be positive, got {nu}")))
        }
    }

    /// The value of ν.
    pub fn nu(self) -> f64 {
        self.nu
    }
}

/// Γ(x) for x > 0: closed forms at ½, 3⁄2, 5⁄2 and positive integers, Lanczos otherwise.
pub fn gamma(x: f64) -> f64 {
    let sqrt_pi = PI.sqrt();
    if x == 0.5 {
        return sqrt_pi;
    }
    if x == 1.5 {
        return 0.5 * sqrt_pi;
    }
    if x == 2.5 {
        return 0.75 * sqrt_pi;
    }
    if x.fract() == 0.0 && (1.0..=171.0).contains(&x) {
        return (1..x as u64).map(|k| k as f64).product();
    }
    lanczos_gamma(x)
}

fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Partial sum Σ_{k=1}^{terms} (−1)^{k+1} u^k / k^ν for |u| < 1.
pub fn f_nu_series(order: FermiOrder, u: f64, terms: usize) -> Result<f64> {
    if !(u.abs() < 1.0) {
        return Err(domain(format!("series requires |u| < 1, got {u}")));
    }
    let nu = order.nu;
    let mut acc = KahanSum::default();
    let mut power = 1.0;
    for k in 1..=terms {
        power *= u;
        let term = power / (k as f64).powf(nu);
        if k % 2 == 1 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    Ok(acc.value())
}

/// Alternating-series remainder bound |u|^{terms+1}/(terms+1)^ν.
pub fn series_remainder_bound(order: FermiOrder, u: f64, terms: usize) -> f64 {
    u.abs().powi(terms as i32 + 1) / ((terms + 1) as f64).powf(order.nu)
}

fn quadrature_once(nu: f64, u: f64, refine: usize) -> f64 {
    let split = u.abs().ln().abs().max(1.0);
    let weight = |t: f64| {
        let e = u * (-t).exp();
        e / (1.0 + e)
    };
    let degree = 16;
    let head_panels = ((4.0 * split.sqrt()).ceil() as usize).max(2) << refine;
    let head = composite(0.0, split.sqrt(), head_panels, degree, |s| {
        let t = s * s;
        2.0 * s.powf(2.0 * nu - 1.0) * weight(t)
    });
    let reach = 60.0 + 2.0 * nu;
    let tail_panels = ((reach / 4.0).ceil() as usize) << refine;
    let tail = composite(0.0, reach, tail_panels, degree, |x| {
        let t = split + x;
        t.powf(nu - 1.0) * weight(t)
    });
    (head + tail) / gamma(nu)
}

/// f_ν(u) by quadrature, for u > −1.
///
/// The half line is split at t = max(1, |ln u|). The head is integrated in the
/// variable s = √t, which removes the t^{ν−1} endpoint singularity, and the tail
/// uses panels of length four out to 60 + 2ν beyond the split. Panels are doubled until two passes agree to `tol`.
pub fn f_nu_quadrature(order: FermiOrder, u: f64, tol: f64) -> Result<f64> {
    if !(u > -1.0) || !u.is_finite() {
        return Err(domain(format!("Fermi-Dirac argument must satisfy u > -1, got {u}")));
    }
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let mut previous = quadrature_once(order.nu, u, 0);
    for refine in 1..=5 {
        let current = quadrature_once(order.nu, u, refine);
        let change = (current - previous).abs();
        if change <= tol * current.abs().max(f64::MIN_POSITIVE) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::Accuracy {
        what: format!("f_{} quadrature at u = {u}", order.nu),
        achieved: (quadrature_once(order.nu, u, 5) - quadrature_once(order.nu, u, 4)).abs() / previous.abs(),
        requested: tol,
    })
}

/// f_ν(u) for u > −1 through the fastest accurate route.
///
/// Uses the alternating series for 0 ≤ u ≤ ½, summed until the remainder bound
/// falls below 10⁻¹⁷ of the sum, and a single refined quadrature pass elsewhere.
pub fn f_nu(order: FermiOrder, u: f64) -> Result<f64> {
    if (0.0..=0.5).contains(&u) {
        if u == 0.0 {
            return Ok(0.0);
        }
        let nu = order.nu;
        let mut acc = KahanSum::default();
        let mut power = 1.0;
        for k in 1..400 {
            power *= u;
            let term = power / (k as f64).powf(nu);
            if k % 2 == 1 {
                acc.add(term);
            } else {
                acc.add(-term);
            }
            if power * u < 1e-17 * acc.value() {
                break;
            }
        }
        Ok(acc.value())
    } else if u > -1.0 && u.is_finite() {
        Ok(quadrature_once(order.nu, u, 1))
    } else {
        Err(domain(format!("Fermi-Dirac argument must satisfy u > -1, got {u}")))
    }
}

/// ∫_{ℝ³} dk u e^{−βk²/2}/(1 + u e^{−βk²/2}) = (2π/β)^{3/2} f_{3/2}(u).
pub fn momentum_fd_integral(beta: f64, fugacity_eff: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    if !(fugacity_eff >= 0.0) {
        return Err(domain(format!("effective fugacity must be non-negative, got {fugacity_eff}")));
    }
    Ok((2.0 * PI / beta).powf(1.5) * f_nu(FermiOrder::THREE_HALVES, fugacity_eff)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_closed_forms_and_lanczos_agree() {
        for x in [0.5, 1.5, 2.5, 3.0, 4.0] {
            assert!((gamma(x) - lanczos_gamma(x)).abs() < 1e-13 * gamma(x));
        }
    }

    #[test]
    fn f_one_is_log() {
        let f1 = FermiOrder::new(1.0).unwrap();
        let v = f_nu_series(f1, 0.5, 200).unwrap();
        assert!((v - 1.5f64.ln()).abs() < 1e-14);
        let q = f_nu_quadrature(f1, 0.5, 1e-13).unwrap();
        assert!((q - 1.5f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn large_argument_matches_log_for_order_one() {
        let f1 = FermiOrder::new(1.0).unwrap();
        let q = f_nu_quadrature(f1, 50.0, 1e-13).unwrap();
        assert!((q - 51f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn negative_argument_matches_log_for_order_one() {
        let f1 = FermiOrder::new(1.0).unwrap();
        let q = f_nu_quadrature(f1, -0.5, 1e-13).unwrap();
        assert!((q - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(f_nu_quadrature(FermiOrder::HALF, -1.0, 1e-10).is_err());
        assert!(f_nu_series(FermiOrder::HALF, 1.0, 10).is_err());
        assert!(FermiOrder::new(0.0).is_err());
        assert!(momentum_fd_integral(1.0, -0.1).is_err());
    }

    #[test]
    fn dispatcher_matches_quadrature() {
        for u in [-0.6, 0.01, 0.3, 0.5, 0.7, 3.0, 1e4] {
            let a = f_nu(FermiOrder::HALF, u).unwrap();
            let b = f_nu_quadrature(FermiOrder::HALF, u, 1e-13).unwrap();
            assert!((a - b).abs() < 1e-12 * b.abs(), "u = {u}: {a} vs {b}");
        }
    }
}
