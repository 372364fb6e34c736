//! Independent numerical helpers shared by the integration tests.

#![allow(dead_code)]

/// Composite Simpson rule with `n` (rounded up to even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Periodic trapezoid rule on [−½, ½) with `n` points.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    (0..n).map(|i| f(-0.5 + (i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64
}

/// Relative difference |a/b − 1|.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
