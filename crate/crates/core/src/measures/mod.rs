//! Equilibrium measures of the field: exact sampling of the Gaussian
//! reference measure, the characteristic function and density of the
//! conserved mass, Fejér-conditioned canonical sampling, pCN sampling of
//! the generalized grand-canonical measure, and partition-function
//! estimation.

mod char_fn;
mod fejer;
mod mcmc;
mod mode_law;
mod partition;

pub use char_fn::{char_product, char_product_log_re, density_of_n, InversionCfg, NDensity};
pub use fejer::{fejer_kernel, FejerSpec};
pub use mcmc::{
    ggc_log_weight, sample_conditioned, sample_ggc, ChainCfg, ChainRun, ChainState, PcnChain,
};
pub use mode_law::{sample_free, ModeLaw};
pub use partition::{
    estimate_log_partition, log_weights_at, rescaled_point, sweep_partition, PartitionEstimate,
    SweepGrid, SweepRow, SweepTable, TiltStats,
};
