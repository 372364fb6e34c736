//! Finite-difference Pauli Hamiltonian with Peierls link phases.
//!
//! Hops of the 7-point Laplacian carry −ħ²/(2h²)·exp(−i(b/ħ)∫a·dl) along the
//! link; the diagonal holds 3ħ²/h² + V(x) + s·għb/4.

use super::BoxDiscretization;
use crate::error::{Error, Result};
use crate::potentials::PeriodicPotential;
use crate::semiclassics::ThermoParams;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

/// Default memory budget for dense matrices (bytes).
pub const DEFAULT_MATRIX_BUDGET: usize = 1 << 30;

/// Link phase of a hop from x to x + h·e₁ at height x₂: ∫a·dl = −x₂h/2.
fn phase_x1(b: f64, hbar: f64, x2: f64, h: f64) -> Complex64 {
    Complex64::from_polar(1.0, (b / hbar) * (x2 * h / 2.0))
}

/// Link phase of a hop from x to x + h·e₂ at abscissa x₁: ∫a·dl = x₁h/2.
fn phase_x2(b: f64, hbar: f64, x1: f64, h: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(b / hbar) * (x1 * h / 2.0))
}

fn zeeman(grid: &BoxDiscretization, params: &ThermoParams) -> f64 {
    grid.spin_branch.sign() * params.g * params.hbar * params.b / 4.0
}

/// Dense n³ × n³ Hamiltonian of one spin branch. Index (i₁, i₂, i₃) ↦ (i₁n + i₂)n + i₃.
pub fn build_hamiltonian(
    grid: &BoxDiscretization,
    params: &ThermoParams,
    potential: &PeriodicPotential,
) -> Result<DMatrix<Complex64>> {
    build_hamiltonian_with_budget(grid, params, potential, DEFAULT_MATRIX_BUDGET)
}

/// [`build_hamiltonian`] with an explicit memory budget in bytes.
pub fn build_hamiltonian_with_budget(
    grid: &BoxDiscretization,
    params: &ThermoParams,
    potential: &PeriodicPotential,
    budget: usize,
) -> Result<DMatrix<Complex64>> {
    let dim = grid.dimension();
    let bytes = dim.saturating_mul(dim).saturating_mul(std::mem::size_of::<Complex64>());
    if bytes > budget {
        return Err(Error::Resource(format!(
            "dense Hamiltonian of dimension {dim} needs {bytes} bytes, budget is {budget}"
        )));
    }
    let n = grid.points_per_side;
    let h = grid.spacing();
    let hbar = params.hbar;
    let t = -hbar * hbar / (2.0 * h * h);
    let diag0 = 3.0 * hbar * hbar / (h * h) + zeeman(grid, params);
    let idx = |i1: usize, i2: usize, i3: usize| (i1 * n + i2) * n + i3;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i1 in 0..n {
        let x1 = grid.coordinate(i1);
        for i2 in 0..n {
            let x2 = grid.coordinate(i2);
            for i3 in 0..n {
                let x3 = grid.coordinate(i3);
                let p = idx(i1, i2, i3);
                m[(p, p)] = Complex64::new(diag0 + potential.value([x1, x2, x3]), 0.0);
                let mut link = |q: usize, w: Complex64| {
                    m[(p, q)] = w * t;
                    m[(q, p)] = (w * t).conj();
                };
                if i1 + 1 < n {
                    link(idx(i1 + 1, i2, i3), phase_x1(params.b, hbar, x2, h));
                }
                if i2 + 1 < n {
                    link(idx(i1, i2 + 1, i3), phase_x2(params.b, hbar, x1, h));
                }
                if i3 + 1 < n {
                    link(idx(i1, i2, i3 + 1), Complex64::new(1.0, 0.0));
                }
            }
        }
    }
    Ok(m)
}

/// Transverse and axial pieces of a Hamiltonian whose potential splits as V⊥ + V₃.
///
/// The field has no x₃ component, so H = H⊥ ⊗ 1 + 1 ⊗ H₃ and the spectrum is
/// the set of all sums of the two smaller spectra.
#[derive(Debug, Clone)]
pub struct SeparableParts {
    /// n² × n² transverse block with Peierls phases and the Zeeman shift.
    pub perp: DMatrix<Complex64>,
    /// n × n axial Dirichlet block.
    pub axial: DMatrix<f64>,
}

impl SeparableParts {
    /// Builds both blocks, or `None` when V does not split along x₃.
    pub fn build(grid: &BoxDiscretization, params: &ThermoParams, potential: &PeriodicPotential) -> Option<Self> {
        let split = potential.axis_split()?;
        let n = grid.points_per_side;
        let h = grid.spacing();
        let hbar = params.hbar;
        let t = -hbar * hbar / (2.0 * h * h);
        let mut perp = DMatrix::<Complex64>::zeros(n * n, n * n);
        let diag_perp = 2.0 * hbar * hbar / (h * h) + zeeman(grid, params);
        for i1 in 0..n {
            let x1 = grid.coordinate(i1);
            for i2 in 0..n {
                let x2 = grid.coordinate(i2);
                let p = i1 * n + i2;
                perp[(p, p)] = Complex64::new(diag_perp + (split.perp)(x1, x2), 0.0);
                if i1 + 1 < n {
                    let q = (i1 + 1) * n + i2;
                    let w = phase_x1(params.b, hbar, x2, h) * t;
                    perp[(p, q)] = w;
                    perp[(q, p)] = w.conj();
                }
                if i2 + 1 < n {
                    let q = i1 * n + i2 + 1;
                    let w = phase_x2(params.b, hbar, x1, h) * t;
                    perp[(p, q)] = w;
                    perp[(q, p)] = w.conj();
                }
            }
        }
        let mut axial = DMatrix::<f64>::zeros(n, n);
        for i3 in 0..n {
            axial[(i3, i3)] = hbar * hbar / (h * h) + (split.axial)(grid.coordinate(i3));
            if i3 + 1 < n {
                axial[(i3, i3 + 1)] = t;
                axial[(i3 + 1, i3)] = t;
            }
        }
        Some(Self { perp, axial })
    }
}

/// Matrix-free application of the box Hamiltonian.
#[derive(Debug, Clone)]
pub struct BoxOperator {
    n: usize,
    hop: f64,
    diag: Vec<f64>,
    phase1: Vec<Complex64>,
    phase2: Vec<Complex64>,
}

impl BoxOperator {
    /// Precomputes the diagonal and the link phases.
    pub fn new(grid: &BoxDiscretization, params: &ThermoParams, potential: &PeriodicPotential) -> Self {
        let n = grid.points_per_side;
        let h = grid.spacing();
        let hbar = params.hbar;
        let diag0 = 3.0 * hbar * hbar / (h * h) + zeeman(grid, params);
        let mut diag = Vec::with_capacity(n * n * n);
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let x = [grid.coordinate(i1), grid.coordinate(i2), grid.coordinate(i3)];
                    diag.push(diag0 + potential.value(x));
                }
            }
        }
        let phase1 = (0..n).map(|i2| phase_x1(params.b, hbar, grid.coordinate(i2), h)).collect();
        let phase2 = (0..n).map(|i1| phase_x2(params.b, hbar, grid.coordinate(i1), h)).collect();
        Self {
            n,
            hop: -hbar * hbar / (2.0 * h * h),
            diag,
            phase1,
            phase2,
        }
    }

    /// Matrix dimension.
    pub fn dimension(&self) -> usize {
        self.diag.len()
    }

    /// out = H·v.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let t = self.hop;
        for i1 in 0..n {
            for i2 in 0..n {
                let p1 = self.phase1[i2];
                let p2 = self.phase2[i1];
                for i3 in 0..n {
                    let p = (i1 * n + i2) * n + i3;
                    let mut acc = v[p] * self.diag[p];
                    let mut hop = Complex64::new(0.0, 0.0);
                    if i1 + 1 < n {
                        hop += p1 * v[p + n * n];
                    }
                    if i1 > 0 {
                        hop += p1.conj() * v[p - n * n];
                    }
                    if i2 + 1 < n {
                        hop += p2 * v[p + n];
                    }
                    if i2 > 0 {
                        hop += p2.conj() * v[p - n];
                    }
                    if i3 + 1 < n {
                        hop += v[p + 1];
                    }
                    if i3 > 0 {
                        hop += v[p - 1];
                    }
                    acc += hop * t;
                    out[p] = acc;
                }
            }
        }
    }
}

/// Writes a matrix dump: little-endian header (n: u64, L, ħ, b, g: f64) then
/// row-major (re, im) pairs of f64.
pub fn write_matrix_dump(
    path: &Path,
    grid: &BoxDiscretization,
    params: &ThermoParams,
    matrix: &DMatrix<Complex64>,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&(grid.points_per_side as u64).to_le_bytes())?;
    for v in [grid.side_length, params.hbar, params.b, params.g] {
        out.write_all(&v.to_le_bytes())?;
    }
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            let z = matrix[(r, c)];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    out.flush()
}
