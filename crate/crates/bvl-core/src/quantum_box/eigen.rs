//! Eigensolvers for the box Hamiltonian: separable sums, dense Hermitian, Lanczos.

use super::hamiltonian::{build_hamiltonian_with_budget, BoxOperator, SeparableParts, DEFAULT_MATRIX_BUDGET};
use super::{BoxDiscretization, Spectrum, SpectrumMethod};
use crate::error::{Error, Result};
use crate::potentials::PeriodicPotential;
use crate::semiclassics::ThermoParams;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solver selection and budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest dimension solved densely when V does not split.
    pub dense_limit: usize,
    /// Memory budget for dense matrices in bytes.
    pub matrix_budget: usize,
    /// Lanczos keeps levels below λ₁ + window; `None` means 40/β.
    pub lanczos_window: Option<f64>,
    /// Krylov basis size per Lanczos restart.
    pub lanczos_basis: usize,
    /// Relative residual below which a Ritz pair is locked.
    pub lanczos_tol: f64,
    /// Seed of the random start vectors.
    pub seed: u64,
    /// Forces a method instead of the automatic choice.
    pub force: Option<SpectrumMethod>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 4096,
            matrix_budget: DEFAULT_MATRIX_BUDGET,
            lanczos_window: None,
            lanczos_basis: 160,
            lanczos_tol: 1e-11,
            seed: 7,
            force: None,
        }
    }
}

fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let is_real = m.iter().all(|z| z.im == 0.0);
    let mut values: Vec<f64> = if is_real {
        let r = m.map(|z| z.re);
        r.symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Spectrum of one spin branch of the box Hamiltonian.
///
/// Potentials that split as V⊥(x₁,x₂) + V₃(x₃) use the tensor-sum structure;
/// otherwise a dense solve up to `dense_limit` and Lanczos beyond.
pub fn box_spectrum(
    grid: &BoxDiscretization,
    params: &ThermoParams,
    potential: &PeriodicPotential,
    options: &EigenOptions,
) -> Result<Spectrum> {
    let dim = grid.dimension();
    let method = match options.force {
        Some(m) => m,
        None if potential.axis_split().is_some() => SpectrumMethod::Separable,
        None if dim <= options.dense_limit => SpectrumMethod::Dense,
        None => SpectrumMethod::Lanczos,
    };
    let mut missing = 0;
    let mut tail_floor = f64::INFINITY;
    let eigenvalues = match method {
        SpectrumMethod::Separable => {
            let parts = SeparableParts::build(grid, params, potential).ok_or_else(|| {
                Error::Domain(format!("potential {} does not split along x3", potential.id()))
            })?;
            let perp = hermitian_eigenvalues(parts.perp);
            let mut axial: Vec<f64> = parts.axial.symmetric_eigenvalues().iter().copied().collect();
            axial.sort_by(f64::total_cmp);
            let mut all = Vec::with_capacity(perp.len() * axial.len());
            for &a in &perp {
                for &c in &axial {
                    all.push(a + c);
                }
            }
            all.sort_by(f64::total_cmp);
            all
        }
        SpectrumMethod::Dense => {
            let m = build_hamiltonian_with_budget(grid, params, potential, options.matrix_budget)?;
            hermitian_eigenvalues(m)
        }
        SpectrumMethod::Lanczos => {
            let op = BoxOperator::new(grid, params, potential);
            let window = options.lanczos_window.unwrap_or(40.0 / params.beta);
            let res = lanczos_lowest(|v, out| op.apply(v, out), op.dimension(), window, options)?;
            missing = dim - res.eigenvalues.len();
            tail_floor = res.tail_floor;
            res.eigenvalues
        }
        SpectrumMethod::Given => {
            return Err(Error::Domain("the Given method cannot compute a spectrum".into()));
        }
    };
    Ok(Spectrum {
        eigenvalues,
        volume: grid.volume(),
        discretization: Some(*grid),
        hbar: params.hbar,
        b: params.b,
        g: params.g,
        potential_id: potential.id().to_string(),
        method,
        missing_levels: missing,
        tail_floor,
    })
}

/// Output of [`lanczos_lowest`].
#[derive(Debug, Clone, PartialEq)]
pub struct LanczosResult {
    /// Locked eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Lower estimate for every eigenvalue not returned.
    pub tail_floor: f64,
    /// Number of Krylov restarts.
    pub restarts: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for u in basis {
            let c = dot(u, w);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= c * ui;
            }
        }
    }
}

/// All eigenvalues below λ₁ + `window` of a Hermitian operator.
///
/// Runs Lanczos with full reorthogonalization, locks converged Ritz pairs and
/// restarts from a random vector orthogonal to the locked ones, so repeated
/// eigenvalues are found with their multiplicity. Stops when a restart yields
/// no new converged value below the window.
pub fn lanczos_lowest<F>(apply: F, dim: usize, window: f64, options: &EigenOptions) -> Result<LanczosResult>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_vecs: Vec<Vec<Complex64>> = Vec::new();
    let mut basis_size = options.lanczos_basis.max(8);
    let mut restarts = 0;
    let mut tail_floor = f64::INFINITY;
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        let free = dim - locked_vecs.len();
        if free == 0 {
            break;
        }
        restarts += 1;
        if restarts > 10_000 {
            return Err(Error::Numeric("Lanczos restart budget exhausted".into()));
        }
        let m = basis_size.min(free);
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        orthogonalize(&mut v, &locked_vecs);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut krylov: Vec<Vec<Complex64>> = vec![v];
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut last_beta = 0.0;
        for j in 0..m {
            apply(&krylov[j], &mut scratch);
            let a = dot(&krylov[j], &scratch).re;
            alpha.push(a);
            let mut w = scratch.clone();
            orthogonalize(&mut w, &locked_vecs);
            orthogonalize(&mut w, &krylov);
            let b = norm(&w);
            last_beta = b;
            let scale = alpha.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
            if j + 1 == m || b < 1e-12 * scale {
                break;
            }
            w.iter_mut().for_each(|x| *x /= b);
            beta.push(b);
            krylov.push(w);
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut new_locked = 0;
        let mut lowest_converged: Option<f64> = None;
        let mut lowest_any = f64::INFINITY;
        for &i in &order {
            let theta = eig.eigenvalues[i];
            lowest_any = lowest_any.min(theta);
            let s: DVector<f64> = eig.eigenvectors.column(i).into_owned();
            let residual = last_beta * s[k - 1].abs();
            if residual > options.lanczos_tol * theta.abs().max(1.0) {
                continue;
            }
            if lowest_converged.is_none() {
                lowest_converged = Some(theta - residual);
            }
            let ground = locked_vals.iter().copied().fold(theta, f64::min);
            if theta > ground + window {
                continue;
            }
            let mut y = vec![Complex64::new(0.0, 0.0); dim];
            for (j, col) in krylov.iter().enumerate().take(k) {
                let c = s[j];
                for (yi, ci) in y.iter_mut().zip(col) {
                    *yi += ci * c;
                }
            }
            orthogonalize(&mut y, &locked_vecs);
            let ny = norm(&y);
            if ny < 0.5 {
                continue;
            }
            y.iter_mut().for_each(|x| *x /= ny);
            locked_vals.push(theta);
            locked_vecs.push(y);
            new_locked += 1;
        }
        if new_locked == 0 {
            match lowest_converged {
                Some(floor) if (lowest_any - floor).abs() <= 1e-8 * floor.abs().max(1.0) || k == free => {
                    tail_floor = floor;
                    break;
                }
                _ => {
                    if basis_size >= free {
                        tail_floor = lowest_any;
                        break;
                    }
                    basis_size = (2 * basis_size).min(free);
                }
            }
        }
    }
    locked_vals.sort_by(f64::total_cmp);
    let ground = locked_vals.first().copied().unwrap_or(f64::INFINITY);
    let cutoff = ground + window;
    locked_vals.retain(|&x| x <= cutoff);
    Ok(LanczosResult {
        eigenvalues: locked_vals,
        tail_floor: tail_floor.min(cutoff),
        restarts,
    })
}
