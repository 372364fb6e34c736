//! Finite-volume oracle: discretized Pauli Hamiltonian in a Dirichlet box with a
//! symmetric-gauge field, its spectrum, and grand-canonical and canonical ensembles.

mod eigen;
mod ensembles;
mod hamiltonian;

pub use eigen::{box_spectrum, lanczos_lowest, EigenOptions, LanczosResult};
pub use ensembles::{
    box_susceptibilities, canonical_partition_contour, canonical_partition_product, canonical_partition_recursive,
    darwin_fowler_report, ensemble_equivalence_study, gc_density_fv, gc_pressure_fv, legendre_pressure,
    BoxFieldStep, BoxSusceptibilities, ContourResult, DarwinFowlerReport, EquivalenceRow, LegendreResult,
};
pub use hamiltonian::{build_hamiltonian, write_matrix_dump, BoxOperator, SeparableParts};

use crate::error::{domain, Result};
use crate::potentials::PeriodicPotential;
use crate::semiclassics::ThermoParams;

/// Spin branch of the Pauli Hamiltonian: `Minus` carries −għb/4, `Plus` carries +għb/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinBranch {
    Minus,
    Plus,
}

impl SpinBranch {
    /// The sign ±1 multiplying għb/4.
    pub fn sign(self) -> f64 {
        match self {
            Self::Minus => -1.0,
            Self::Plus => 1.0,
        }
    }
}

/// Cubic box Λ_L = (−L/2, L/2)³ with n interior grid points per side and Dirichlet walls.
///
/// The vector potential is the symmetric gauge a(x) = ½(−x₂, x₁, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDiscretization {
    pub side_length: f64,
    pub points_per_side: usize,
    pub spin_branch: SpinBranch,
}

impl BoxDiscretization {
    /// Validated box on the `Minus` branch.
    pub fn new(side_length: f64, points_per_side: usize) -> Result<Self> {
        if !(side_length > 0.0 && side_length.is_finite()) {
            return Err(domain(format!("box side must be positive, got {side_length}")));
        }
        if points_per_side < 4 {
            return Err(domain(format!("points per side must be >= 4, got {points_per_side}")));
        }
        Ok(Self {
            side_length,
            points_per_side,
            spin_branch: SpinBranch::Minus,
        })
    }

    /// Same box on another spin branch.
    pub fn with_branch(mut self, spin_branch: SpinBranch) -> Self {
        self.spin_branch = spin_branch;
        self
    }

    /// Grid spacing L/(n + 1).
    pub fn spacing(&self) -> f64 {
        self.side_length / (self.points_per_side as f64 + 1.0)
    }

    /// Box volume L³.
    pub fn volume(&self) -> f64 {
        self.side_length.powi(3)
    }

    /// Coordinate of interior grid index i ∈ [0, n).
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.side_length + (i as f64 + 1.0) * self.spacing()
    }

    /// Matrix dimension n³.
    pub fn dimension(&self) -> usize {
        self.points_per_side.pow(3)
    }
}

/// How a spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Sum of a transverse and an axial spectrum (V = V⊥(x₁,x₂) + V₃(x₃)).
    Separable,
    /// Dense Hermitian eigensolve of the full matrix.
    Dense,
    /// Lanczos with locking; only the low part of the spectrum is present.
    Lanczos,
    /// Eigenvalues supplied directly.
    Given,
}

/// Ascending eigenvalues of a finite-volume Hamiltonian with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Box volume |Λ_L|.
    pub volume: f64,
    /// Box geometry, when the spectrum comes from a discretized box.
    pub discretization: Option<BoxDiscretization>,
    pub hbar: f64,
    pub b: f64,
    pub g: f64,
    pub potential_id: String,
    pub method: SpectrumMethod,
    /// Levels not computed (Lanczos only); they all lie above `tail_floor`.
    pub missing_levels: usize,
    /// Lower bound for every missing level.
    pub tail_floor: f64,
}

impl Spectrum {
    /// A spectrum from explicit levels in a region of the given volume.
    pub fn from_levels(mut eigenvalues: Vec<f64>, volume: f64) -> Result<Self> {
        if !(volume > 0.0) {
            return Err(domain("volume must be positive"));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(domain("eigenvalues must be finite"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            eigenvalues,
            volume,
            discretization: None,
            hbar: f64::NAN,
            b: 0.0,
            g: 0.0,
            potential_id: "given".into(),
            method: SpectrumMethod::Given,
            missing_levels: 0,
            tail_floor: f64::INFINITY,
        })
    }

    /// Number of eigenvalues present.
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Lowest eigenvalue.
    pub fn ground(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::INFINITY)
    }

    /// Union of both spin branches built from an orbital (g = 0) spectrum:
    /// every level λ appears as λ − għb/4 and λ + għb/4.
    pub fn spin_union(&self, g: f64) -> Self {
        let shift = g * self.hbar * self.b / 4.0;
        let mut levels = Vec::with_capacity(2 * self.eigenvalues.len());
        let minus: Vec<f64> = self.eigenvalues.iter().map(|l| l - shift).collect();
        let plus: Vec<f64> = self.eigenvalues.iter().map(|l| l + shift).collect();
        let (mut i, mut j) = (0, 0);
        while i < minus.len() || j < plus.len() {
            if j >= plus.len() || (i < minus.len() && minus[i] <= plus[j]) {
                levels.push(minus[i]);
                i += 1;
            } else {
                levels.push(plus[j]);
                j += 1;
            }
        }
        Self {
            eigenvalues: levels,
            g,
            missing_levels: 2 * self.missing_levels,
            tail_floor: self.tail_floor - shift.abs(),
            ..self.clone()
        }
    }
}

/// Lower bound ħ|b|/2·(1 − g/2) − ‖V‖∞ for the continuum spectrum.
pub fn spectrum_lower_bound(params: &ThermoParams, potential: &PeriodicPotential) -> f64 {
    params.hbar * params.b.abs() / 2.0 * (1.0 - params.g / 2.0) - potential.sup_norm
}
