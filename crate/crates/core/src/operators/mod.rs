//! Spectral-theory diagnostics: the free number operator and its trace
//! formula, the log-Sobolev constant, the ground-state-transform potential,
//! Golden-Thompson trace bounds, and a finite-dimensional Hermite-Galerkin
//! model of the whole chain.

mod fdmodel;
mod free_op;
mod potential;

pub use fdmodel::{
    fd_build, fd_exp_integral_quadrature, fd_gap, fd_gap_free, fd_potential,
    fd_potential_lower_bound, FdMatrices, FdModel, FdSpectrum,
};
pub use free_op::{cls_constant, trace_free, FreeOperatorSpec};
pub use potential::{
    effective_potential, golden_thompson_bound, h0_apply_tilt, mc_exp_integral, tilt_gradient,
    tilt_potential, u_lower_bound, GtBound, McEstimate,
};
