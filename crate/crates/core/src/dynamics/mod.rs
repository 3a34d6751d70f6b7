//! Time integration: the deterministic nonlinear Schrödinger flow, the
//! grand-canonical stochastic flow, and the sphere-constrained canonical SDE.

mod canonical;
mod ggc_sde;
mod nls;
mod noise;
mod trajectory;

pub use canonical::{measure_mass_drift, CanonicalSdeFlow};
pub use ggc_sde::{ggc_sde_step, GgcSdeFlow, SdeScheme};
pub use nls::{nls_step, SplitStepNls};
pub use noise::{make_noise, make_noise_unchecked, noise_window_check, NoiseSpec};
pub use trajectory::{trajectory, Flow, IntegratorCfg, Observables, TimeSeries};
