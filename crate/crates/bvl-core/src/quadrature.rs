//! Gauss–Legendre rules, composite panels and compensated summation.

use gauss_quad::GaussLegendre;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of a Gauss–Legendre rule on [-1, 1], ascending in the node.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integral of `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut acc = KahanSum::default();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

/// Returns a cached Gauss–Legendre rule with `degree` nodes (degree ≥ 2).
pub fn gauss_legendre(degree: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let degree = degree.max(2);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(degree)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(degree).expect("degree >= 2 is always valid");
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(GaussRule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Composite Gauss–Legendre integral of `f` over [a, b] with `panels` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, degree: usize, mut f: F) -> f64 {
    let rule = gauss_legendre(degree);
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut acc = KahanSum::default();
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        for (x, w) in rule.mapped(lo, hi) {
            acc.add(w * f(x));
        }
    }
    acc.value()
}

/// Nodes and weights of a composite rule on [a, b], flattened.
pub fn composite_nodes(a: f64, b: f64, panels: usize, degree: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(degree);
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        out.extend(rule.mapped(lo, hi));
    }
    out
}

/// Integral over [0, ∞) of a function decaying at least like e^{-t/scale}.
///
/// The half line is cut into panels of width `scale` out to `reach·scale`;
/// the caller guarantees the discarded tail is negligible.
pub fn half_line<F: FnMut(f64) -> f64>(scale: f64, reach: f64, degree: usize, f: F) -> f64 {
    let panels = reach.ceil().max(1.0) as usize;
    composite(0.0, scale * reach, panels, degree, f)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    /// Adds one term.
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated value.
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = KahanSum::default();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
    }

    #[test]
    fn nodes_are_ascending_and_weights_sum_to_two() {
        let rule = gauss_legendre(32);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!((sum(rule.weights.iter().copied()) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn half_line_exponential() {
        let v = half_line(1.0, 45.0, 20, |t| (-t).exp());
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = sum([1e16, 1.0, -1e16]);
        assert_eq!(v, 1.0);
    }
}
