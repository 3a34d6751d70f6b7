//! Importance-sampling estimates of the tilted partition function and
//! parameter sweeps over the ensemble parameters.

use std::io::Write;

use rand::Rng;

use super::mode_law::ModeLaw;
use crate::params::ModelParams;
use crate::stats::{self, Estimate};
use crate::{CoreError, Result};

/// Per-sample sufficient statistics of the tilt under a fixed reference
/// measure: once `(||phi||_p^p, N(phi))` are recorded, the tilt weight at any
/// `(lambda, kappa)` of the same reference is a scalar function of them.
#[derive(Debug, Clone)]
pub struct TiltStats {
    pub lp_p: Vec<f64>,
    pub n: Vec<f64>,
    /// Inverse temperature of the reference the samples were drawn from.
    pub beta: f64,
    pub p: f64,
}

/// Draw `n_samples` reference fields and record their tilt statistics.
pub fn collect_tilt_stats<R: Rng>(
    rng: &mut R,
    params: &ModelParams,
    n_samples: usize,
) -> Result<TiltStats> {
    let law = ModeLaw::from_params(params);
    let mut lp_p = Vec::with_capacity(n_samples);
    let mut n = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let f = law.sample(rng);
        lp_p.push(f.lp_norm_p(params.p)?);
        n.push(f.l2_norm_sq());
    }
    Ok(TiltStats {
        lp_p,
        n,
        beta: params.beta,
        p: params.p,
    })
}

/// Tilt log-weights at `(lambda, kappa_eff, r)` against the reference the
/// statistics were collected under.
pub fn log_weights_at(stats: &TiltStats, lambda: f64, kappa_eff: f64, r: f64) -> Vec<f64> {
    stats
        .lp_p
        .iter()
        .zip(&stats.n)
        .map(|(&lp, &n)| {
            stats.beta * lambda / stats.p * lp - stats.beta * kappa_eff * n.powf(r)
        })
        .collect()
}

/// The rescaled parameter point with the same partition function:
/// `(beta, lambda, kappa) -> (1, lambda beta^{1-p/2}, kappa beta^{1-r})`.
pub fn rescaled_point(beta: f64, lambda: f64, kappa: f64, p: f64, r: f64) -> (f64, f64, f64) {
    (1.0, lambda * beta.powf(1.0 - p / 2.0), kappa * beta.powf(1.0 - r))
}

/// An importance-sampling estimate of the log partition function.
#[derive(Debug, Clone, Copy)]
pub struct PartitionEstimate {
    pub log_z: f64,
    pub std_err: f64,
    pub ess: f64,
    pub n_samples: usize,
    /// Raised when the effective sample size drops below 100.
    pub unreliable: bool,
}

const JACKKNIFE_BLOCKS: usize = 50;

fn estimate_from_weights(ws: &[f64]) -> PartitionEstimate {
    let est = stats::log_mean_exp_jackknife(ws, JACKKNIFE_BLOCKS);
    let ess = stats::ess_from_log_weights(ws);
    PartitionEstimate {
        log_z: est.value,
        std_err: est.std_err,
        ess,
        n_samples: ws.len(),
        unreliable: ess < 100.0,
    }
}

/// Estimate `log E_ref[exp(tilt)]` by importance sampling from the reference,
/// with a delete-block jackknife error.
pub fn estimate_log_partition<R: Rng>(
    rng: &mut R,
    params: &ModelParams,
    n_samples: usize,
) -> Result<PartitionEstimate> {
    validate_integrability(params)?;
    let stats = collect_tilt_stats(rng, params, n_samples)?;
    let ws = log_weights_at(&stats, params.lambda, params.kappa_eff(), params.r);
    Ok(estimate_from_weights(&ws))
}

/// Integrability windows for the tilt: `p < 6`, confinement present for
/// focusing coupling, and `r` above the interpolation threshold.
pub fn validate_integrability(params: &ModelParams) -> Result<()> {
    params.validate_gibbs()?;
    if params.lambda > 0.0 {
        let threshold = params.integrability_threshold();
        if params.r <= threshold {
            return Err(CoreError::Config(format!(
                "confinement exponent r = {} must exceed {threshold} for p = {}",
                params.r, params.p
            )));
        }
    }
    Ok(())
}

/// Parameter grid of a partition sweep.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub beta: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub log_z: f64,
    pub std_err: f64,
    pub ess: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub n_samples: usize,
}

impl SweepTable {
    /// CSV with a header row: `beta,lambda,kappa,log_z,std_err,ess`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "beta,lambda,kappa,log_z,std_err,ess")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.beta, r.lambda, r.kappa, r.log_z, r.std_err, r.ess
            )?;
        }
        Ok(())
    }
}

/// Estimate the log partition function on a `(beta, lambda, kappa)` grid.
///
/// One reference sample set is drawn per `beta` (a fresh stream each), and
/// all `(lambda, kappa)` points at that `beta` reuse it; the jackknife error
/// accounts for the shared samples.
pub fn sweep_partition<R: Rng>(
    rng: &mut R,
    grid: &SweepGrid,
    base: &ModelParams,
    n_samples: usize,
) -> Result<SweepTable> {
    let mut rows = Vec::new();
    for &beta in &grid.betas {
        let params = ModelParams {
            beta,
            ..base.clone()
        };
        let stats = collect_tilt_stats(rng, &params, n_samples)?;
        for &lambda in &grid.lambdas {
            for &kappa in &grid.kappas {
                let point = ModelParams {
                    beta,
                    lambda,
                    kappa,
                    ..base.clone()
                };
                validate_integrability(&point)?;
                let ws = log_weights_at(&stats, lambda, point.kappa_eff(), point.r);
                let est = estimate_from_weights(&ws);
                rows.push(SweepRow {
                    beta,
                    lambda,
                    kappa,
                    log_z: est.log_z,
                    std_err: est.std_err,
                    ess: est.ess,
                });
            }
        }
    }
    Ok(SweepTable {
        rows,
        n_samples,
    })
}

/// Second finite differences of `log Z` along one sweep axis, with jackknife
/// errors that respect the shared samples.
///
/// Returns one estimate per interior grid point of `values`, where the
/// statistic is `log Z(v[i+1]) - 2 log Z(v[i]) + log Z(v[i-1])` with the other
/// parameter held at `other`.
pub fn second_differences(
    stats: &TiltStats,
    axis_is_lambda: bool,
    values: &[f64],
    other: f64,
    kappa_convention_r: f64,
    r: f64,
) -> Vec<Estimate> {
    let n = stats.n.len();
    let nb = JACKKNIFE_BLOCKS.min(n);
    let bounds: Vec<usize> = (0..=nb).map(|b| b * n / nb).collect();
    let log_z_at = |v: f64, skip: Option<usize>| -> f64 {
        let (lambda, kappa_eff) = if axis_is_lambda {
            (v, other)
        } else {
            (other, v)
        };
        let _ = kappa_convention_r;
        let ws = log_weights_at(stats, lambda, kappa_eff, r);
        match skip {
            None => stats::log_mean_exp(&ws),
            Some(b) => {
                let mut kept = Vec::with_capacity(n - (bounds[b + 1] - bounds[b]));
                kept.extend_from_slice(&ws[..bounds[b]]);
                kept.extend_from_slice(&ws[bounds[b + 1]..]);
                stats::log_mean_exp(&kept)
            }
        }
    };
    (1..values.len() - 1)
        .map(|i| {
            stats::jackknife(nb, |skip| {
                log_z_at(values[i + 1], skip) - 2.0 * log_z_at(values[i], skip)
                    + log_z_at(values[i - 1], skip)
            })
        })
        .collect()
}
