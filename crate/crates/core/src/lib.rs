//! Spectral toolkit for a complex scalar field on the circle with a focusing
//! power nonlinearity, thermalized by Ornstein-Uhlenbeck noise in its Fourier
//! modes.
//!
//! The crate is organized around the measures and flows of that system:
//!
//! - [`field`]: truncated Fourier representation of the field and the
//!   functionals built from it (norms, Hamiltonian, effective energy and its
//!   gradient, Hölder seminorms).
//! - [`measures`]: exact sampling of the Gaussian reference measure, mode
//!   characteristic functions and the density of the conserved mass,
//!   Fejér-conditioned canonical sampling, pCN sampling of the generalized
//!   grand-canonical measure, and partition-function estimation.
//! - [`dynamics`]: deterministic split-step integration of the nonlinear
//!   Schrödinger flow, the grand-canonical stochastic flow with exact
//!   per-mode OU substeps, and the sphere-constrained canonical SDE.
//! - [`operators`]: the free number operator, its trace formula and
//!   log-Sobolev constant, the ground-state-transform potential, the
//!   Golden-Thompson trace bound, and a finite-dimensional Hermite-Galerkin
//!   lab for all of the above.
//! - [`relaxation`]: ensemble experiments measuring exponential decay of
//!   observables toward equilibrium, with bootstrap rate fits.
//! - [`verify`]: a machine-readable invariant harness backing the CLI's
//!   `verify` subcommand.

pub mod dynamics;
pub mod error;
pub mod field;
pub mod measures;
pub mod operators;
pub mod params;
pub mod relaxation;
pub mod rng;
pub mod stats;
pub mod verify;

pub use error::CoreError;
pub use field::{PhysicalField, SpectralField};
pub use params::{KappaConvention, ModelParams};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
