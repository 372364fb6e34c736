//! ℤ³-periodic external potentials and quadrature over the unit cell Ω = (−½, ½)³.

use crate::error::{domain, ensure_finite, Error, Result};
use crate::quadrature::{gauss_legendre, KahanSum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Position in ℝ³ in cell units.
pub type Point = [f64; 3];

/// Folds a coordinate into [−½, ½) by subtracting the nearest integer; ties go to −½.
pub fn fold(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// Folds every coordinate of a point into the unit cell.
pub fn fold_point(x: Point) -> Point {
    [fold(x[0]), fold(x[1]), fold(x[2])]
}

/// User-supplied potential evaluator.
pub type Evaluator = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// The shape of a built-in or custom potential.
#[derive(Clone)]
pub enum PotentialKind {
    /// V ≡ 0.
    Zero,
    /// V(x) = amplitude · cos(2π x_axis).
    Cosine { amplitude: f64, axis: usize },
    /// V(x) = amplitude · Σᵢ cos(2π xᵢ).
    TripleCosine { amplitude: f64 },
    /// Truncated Weierstrass function of x₁: Σ_{k=0}^{terms} a^k cos(2π b^k x₁).
    Weierstrass { a: f64, b: u32, terms: u32 },
    /// Arbitrary periodic evaluator; callers vouch for the metadata.
    Custom(Evaluator),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Cosine { amplitude, axis } => write!(f, "Cosine({amplitude}, axis {axis})"),
            Self::TripleCosine { amplitude } => write!(f, "TripleCosine({amplitude})"),
            Self::Weierstrass { a, b, terms } => write!(f, "Weierstrass(a={a}, b={b}, K={terms})"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A ℤ³-periodic potential with its Hölder metadata.
#[derive(Clone, Debug)]
pub struct PeriodicPotential {
    kind: PotentialKind,
    id: String,
    /// Hölder exponent θ ∈ (0, 1].
    pub theta: f64,
    /// Hölder constant C with |V(x) − V(y)| ≤ C|x − y|^θ.
    pub holder_constant: f64,
    /// Upper bound for ‖V‖∞.
    pub sup_norm: f64,
}

/// Measure of the unit cell Ω.
pub const CELL_MEASURE: f64 = 1.0;

fn weierstrass(a: f64, b: u32, terms: u32, x: f64) -> f64 {
    let mut acc = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0;
    for _ in 0..=terms {
        acc += amp * (2.0 * PI * freq * x).cos();
        amp *= a;
        freq *= b as f64;
    }
    acc
}

impl PeriodicPotential {
    /// V ≡ 0.
    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::Zero,
            id: "zero".into(),
            theta: 1.0,
            holder_constant: 0.0,
            sup_norm: 0.0,
        }
    }

    /// V(x) = amplitude · cos(2π x_axis).
    pub fn cosine(amplitude: f64, axis: usize) -> Result<Self> {
        ensure_finite("amplitude", amplitude)?;
        if axis > 2 {
            return Err(domain(format!("axis must be 0, 1 or 2, got {axis}")));
        }
        Ok(Self {
            kind: PotentialKind::Cosine { amplitude, axis },
            id: format!("cosine(amplitude={amplitude},axis={axis})"),
            theta: 1.0,
            holder_constant: 2.0 * PI * amplitude.abs(),
            sup_norm: amplitude.abs(),
        })
    }

    /// V(x) = amplitude · Σᵢ cos(2π xᵢ).
    pub fn triple_cosine(amplitude: f64) -> Result<Self> {
        ensure_finite("amplitude", amplitude)?;
        Ok(Self {
            kind: PotentialKind::TripleCosine { amplitude },
            id: format!("triple-cosine(amplitude={amplitude})"),
            theta: 1.0,
            holder_constant: 2.0 * PI * 3f64.sqrt() * amplitude.abs(),
            sup_norm: 3.0 * amplitude.abs(),
        })
    }

    /// Truncated Weierstrass function W_K(x₁) = Σ_{k=0}^{K} a^k cos(2π b^k x₁).
    ///
    /// The Hölder exponent is min(1, ln(1/a)/ln b). For θ < 1 the constant
    /// splits the terms at b^k|x − y| = 1/π and bounds both geometric tails.
    pub fn weierstrass(a: f64, b: u32, terms: u32) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(domain(format!("Weierstrass a must lie in (0,1), got {a}")));
        }
        if b < 2 {
            return Err(domain(format!("Weierstrass b must be an integer >= 2, got {b}")));
        }
        let bf = b as f64;
        let raw_theta = (1.0 / a).ln() / bf.ln();
        let sup_norm = (0..=terms).map(|k| a.powi(k as i32)).sum::<f64>();
        let (theta, holder_constant) = if raw_theta >= 1.0 {
            let c = 2.0 * PI * (0..=terms).map(|k| (a * bf).powi(k as i32)).sum::<f64>();
            (1.0, c)
        } else {
            let t = raw_theta;
            let c = 2.0 * PI.powf(t) * (1.0 / (1.0 - bf.powf(t - 1.0)) + 1.0 / (1.0 - bf.powf(-t)));
            (t, c)
        };
        Ok(Self {
            kind: PotentialKind::Weierstrass { a, b, terms },
            id: format!("weierstrass(a={a},b={b},K={terms})"),
            theta,
            holder_constant,
            sup_norm,
        })
    }

    /// Wraps a user evaluator. The evaluator must be ℤ³-periodic.
    pub fn custom(id: impl Into<String>, evaluator: Evaluator, theta: f64, holder_constant: f64, sup_norm: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(domain(format!("theta must lie in (0,1], got {theta}")));
        }
        if holder_constant < 0.0 || sup_norm < 0.0 {
            return Err(domain("Hölder constant and sup norm must be non-negative"));
        }
        Ok(Self {
            kind: PotentialKind::Custom(evaluator),
            id: id.into(),
            theta,
            holder_constant,
            sup_norm,
        })
    }

    /// Builds a library potential from its configuration name and parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(domain(format!("potential '{name}' takes {n} parameter(s), got {}", params.len())))
            }
        };
        match name {
            "zero" => {
                need(0)?;
                Ok(Self::zero())
            }
            "cosine" => {
                if params.len() == 1 {
                    Self::cosine(params[0], 0)
                } else {
                    need(2)?;
                    if params[1].fract() != 0.0 || params[1] < 0.0 {
                        return Err(domain("cosine axis must be a non-negative integer"));
                    }
                    Self::cosine(params[0], params[1] as usize)
                }
            }
            "triple-cosine" => {
                need(1)?;
                Self::triple_cosine(params[0])
            }
            "weierstrass" => {
                need(3)?;
                if params[1].fract() != 0.0 || params[2].fract() != 0.0 || params[1] < 0.0 || params[2] < 0.0 {
                    return Err(domain("weierstrass b and K must be non-negative integers"));
                }
                Self::weierstrass(params[0], params[1] as u32, params[2] as u32)
            }
            other => Err(domain(format!(
                "unknown potential '{other}' (expected zero, cosine, triple-cosine, weierstrass)"
            ))),
        }
    }

    /// Identifier used in reports.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Underlying shape.
    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// True for V ≡ 0.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    /// V at the cell-folded image of `x`.
    pub fn eval(&self, x: Point) -> Result<f64> {
        for (i, &c) in x.iter().enumerate() {
            ensure_finite(&format!("x[{i}]"), c)?;
        }
        Ok(self.value(x))
    }

    /// V at the cell-folded image of `x` without validation.
    pub fn value(&self, x: Point) -> f64 {
        let y = fold_point(x);
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Cosine { amplitude, axis } => amplitude * (2.0 * PI * y[*axis]).cos(),
            PotentialKind::TripleCosine { amplitude } => {
                amplitude * y.iter().map(|c| (2.0 * PI * c).cos()).sum::<f64>()
            }
            PotentialKind::Weierstrass { a, b, terms } => weierstrass(*a, *b, *terms, y[0]),
            PotentialKind::Custom(f) => f(y),
        }
    }

    /// Splits V = V⊥(x₁, x₂) + V₃(x₃) when the potential has that structure.
    pub fn axis_split(&self) -> Option<AxisSplit> {
        let split = match &self.kind {
            PotentialKind::Zero => AxisSplit::new(|_, _| 0.0, |_| 0.0),
            PotentialKind::Cosine { amplitude, axis } => {
                let a = *amplitude;
                match axis {
                    0 => AxisSplit::new(move |x1, _| a * (2.0 * PI * fold(x1)).cos(), |_| 0.0),
                    1 => AxisSplit::new(move |_, x2| a * (2.0 * PI * fold(x2)).cos(), |_| 0.0),
                    _ => AxisSplit::new(|_, _| 0.0, move |x3| a * (2.0 * PI * fold(x3)).cos()),
                }
            }
            PotentialKind::TripleCosine { amplitude } => {
                let a = *amplitude;
                AxisSplit::new(
                    move |x1, x2| a * ((2.0 * PI * fold(x1)).cos() + (2.0 * PI * fold(x2)).cos()),
                    move |x3| a * (2.0 * PI * fold(x3)).cos(),
                )
            }
            PotentialKind::Weierstrass { a, b, terms } => {
                let (a, b, terms) = (*a, *b, *terms);
                AxisSplit::new(move |x1, _| weierstrass(a, b, terms, fold(x1)), |_| 0.0)
            }
            PotentialKind::Custom(_) => return None,
        };
        Some(split)
    }
}

/// Decomposition V(x) = perp(x₁, x₂) + axial(x₃).
#[derive(Clone)]
pub struct AxisSplit {
    pub perp: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub axial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl AxisSplit {
    fn new(
        perp: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        axial: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            perp: Arc::new(perp),
            axial: Arc::new(axial),
        }
    }
}

/// Tensor Gauss–Legendre quadrature over the unit cell with order doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellQuadrature {
    /// Starting number of nodes per axis.
    pub order: usize,
    /// Target relative change between successive doublings.
    pub tolerance: f64,
    /// Largest order tried before giving up.
    pub max_order: usize,
}

impl Default for CellQuadrature {
    fn default() -> Self {
        Self {
            order: 32,
            tolerance: 1e-12,
            max_order: 128,
        }
    }
}

impl CellQuadrature {
    /// Validates the invariants order ≥ 2 and tolerance > 0.
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || self.max_order < self.order {
            return Err(domain(format!(
                "cell quadrature order must be >= 2 and <= max_order (order {}, max {})",
                self.order, self.max_order
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(domain("cell quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// Tensor quadrature nodes over Ω with the potential sampled at every node.
#[derive(Debug, Clone)]
pub struct CellGrid {
    pub order: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    /// Distinct potential values with their summed weights, used by [`CellGrid::integrate`].
    pub levels: Vec<(f64, f64)>,
}

/// Relative spacing below which two sampled potential values share one level.
const LEVEL_MERGE: f64 = 1e-15;

impl CellGrid {
    /// Samples `potential` on the order-`order` tensor rule.
    pub fn new(potential: &PeriodicPotential, order: usize) -> Self {
        let rule = gauss_legendre(order);
        let axis: Vec<(f64, f64)> = rule.mapped(-0.5, 0.5).collect();
        let mut points = Vec::with_capacity(axis.len().pow(3));
        let mut weights = Vec::with_capacity(points.capacity());
        for &(x, wx) in &axis {
            for &(y, wy) in &axis {
                for &(z, wz) in &axis {
                    points.push([x, y, z]);
                    weights.push(wx * wy * wz);
                }
            }
        }
        let values: Vec<f64> = points.iter().map(|&p| potential.value(p)).collect();
        let levels = merge_levels(&values, &weights);
        Self {
            order,
            points,
            weights,
            values,
            levels,
        }
    }

    /// ∫_Ω g(V(x)) dx on this grid.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        let mut acc = KahanSum::default();
        for &(v, w) in &self.levels {
            acc.add(w * g(v));
        }
        acc.value()
    }

    /// Doubles the order until ∫ g(V) changes by less than the tolerance and
    /// returns the coarser grid of the final pair, which already meets it.
    pub fn converged<F: Fn(f64) -> f64>(potential: &PeriodicPotential, quad: &CellQuadrature, g: F) -> Result<(Self, f64)> {
        quad.validate()?;
        let mut grid = Self::new(potential, quad.order);
        let mut value = grid.integrate(&g);
        if potential.is_zero() {
            return Ok((grid, value));
        }
        let mut order = quad.order;
        loop {
            let next_order = 2 * order;
            if next_order > quad.max_order {
                let coarse = Self::new(potential, order / 2).integrate(&g);
                return Err(Error::Accuracy {
                    what: format!("cell quadrature of {}", potential.id()),
                    achieved: ((value - coarse) / value).abs(),
                    requested: quad.tolerance,
                });
            }
            let next = Self::new(potential, next_order);
            let next_value = next.integrate(&g);
            let change = ((next_value - value) / next_value).abs();
            if change < quad.tolerance {
                return Ok((grid, value));
            }
            grid = next;
            value = next_value;
            order = next_order;
        }
    }
}

/// Groups node values that agree to [`LEVEL_MERGE`] and sums their weights.
fn merge_levels(values: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<(f64, f64)> = Vec::new();
    let mut sums: Vec<KahanSum> = Vec::new();
    for (v, w) in pairs {
        match levels.last() {
            Some(&(head, _)) if (v - head).abs() <= LEVEL_MERGE * head.abs().max(1.0) => {
                sums.last_mut().expect("level sums track levels").add(w);
            }
            _ => {
                levels.push((v, 0.0));
                let mut acc = KahanSum::default();
                acc.add(w);
                sums.push(acc);
            }
        }
    }
    for (level, acc) in levels.iter_mut().zip(&sums) {
        level.1 = acc.value();
    }
    levels
}

/// ∫_Ω e^{−βV(x)} dx.
pub fn boltzmann_cell_integral(potential: &PeriodicPotential, beta: f64, quad: &CellQuadrature) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    CellGrid::converged(potential, quad, |v| (-beta * v).exp()).map(|(_, value)| value)
}

/// Largest sampled ratio |V(x) − V(y)|/|x − y|^θ and the pair attaining it.
pub fn holder_gap_profile(
    potential: &PeriodicPotential,
    theta: f64,
    sample_pairs: usize,
    rng_seed: u64,
) -> Result<(f64, (Point, Point))> {
    if sample_pairs == 0 {
        return Err(domain("sample_pairs must be >= 1"));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(domain(format!("theta must lie in (0,1], got {theta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best = (0.0, ([0.0; 3], [0.0; 3]));
    for _ in 0..sample_pairs {
        let x: Point = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let dist = 10f64.powf(-6.0 * rng.random::<f64>());
        let mut dir = [0.0; 3];
        let mut norm = 0.0;
        while norm < 1e-8 {
            for d in dir.iter_mut() {
                *d = rng.random::<f64>() * 2.0 - 1.0;
            }
            norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        }
        let y: Point = [
            x[0] + dist * dir[0] / norm,
            x[1] + dist * dir[1] / norm,
            x[2] + dist * dir[2] / norm,
        ];
        let sep = ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2) + (y[2] - x[2]).powi(2)).sqrt();
        if sep == 0.0 {
            continue;
        }
        let ratio = (potential.value(x) - potential.value(y)).abs() / sep.powf(theta);
        if ratio > best.0 {
            best = (ratio, (x, y));
        }
    }
    Ok(best)
}
