//! Numerics for the semiclassical limit of the Bohr–van Leeuwen theorem.
//!
//! The crate evaluates leading-order density, fugacity and zero-field
//! susceptibility formulas for a spin-½ Fermi gas in a ℤ³-periodic potential and
//! checks them against exact oracles: Landau-level sums for the free gas,
//! finite-box spectra with Peierls phases, canonical partition functions and
//! the classical Maxwell–Boltzmann gas. A geometry module realizes the cutoff
//! families, Green functions and contour used by the semiclassical analysis.
//!
//! Units: m = 1 and k_B is absorbed into β. Defaults are q = c = 1 and g = 2.

// Domain checks are written as `!(x > 0.0)` so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical_gas;
pub mod error;
pub mod fermi_dirac;
pub mod geometry;
pub mod landau;
pub mod potentials;
pub mod quadrature;
pub mod quantum_box;
pub mod semiclassics;

pub use error::{Error, Result};
