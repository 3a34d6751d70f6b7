//! Trajectory recording: step any flow, sample observables on a fixed
//! schedule, and fault on blow-up with the offending step index.

use std::io::Write;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ggc_sde::SdeScheme;
use crate::field::SpectralField;
use crate::params::ModelParams;
use crate::{CoreError, Result};

/// A time-steppable state with field snapshots.
pub trait Flow {
    fn step(&mut self, dt: f64, rng: &mut ChaCha8Rng) -> Result<()>;
    fn snapshot(&self) -> SpectralField;
    /// Cheap conserved-mass read for blow-up checks.
    fn mass(&self) -> f64;
}

/// Integration schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorCfg {
    pub dt: f64,
    pub scheme: SdeScheme,
    pub n_steps: usize,
    pub record_every: usize,
}

impl IntegratorCfg {
    pub fn new(dt: f64, scheme: SdeScheme, n_steps: usize, record_every: usize) -> Self {
        Self {
            dt,
            scheme,
            n_steps,
            record_every,
        }
    }

    /// Explicit schemes must resolve the stiffest retained mode.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(CoreError::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(CoreError::Config("record_every must be >= 1".into()));
        }
        if self.scheme == SdeScheme::EulerMaruyama {
            let stiffness = params.omega_tilde(params.k_max as i64) * self.dt;
            if stiffness > 1.0 {
                return Err(CoreError::Config(format!(
                    "Euler-Maruyama needs dt * omega_max <= 1, got {stiffness}"
                )));
            }
        }
        Ok(())
    }
}

/// Which functionals to record along a trajectory.
#[derive(Debug, Clone)]
pub struct Observables {
    /// Sobolev order of the recorded fractional norm.
    pub gamma: f64,
    /// Additionally record `|X_k|^2` for these wave indices.
    pub mode_sq: Vec<i64>,
    params: ModelParams,
}

impl Observables {
    pub fn standard(params: &ModelParams) -> Self {
        Self {
            gamma: 0.25,
            mode_sq: Vec::new(),
            params: params.clone(),
        }
    }

    pub fn with_mode_sq(params: &ModelParams, modes: Vec<i64>) -> Self {
        Self {
            gamma: 0.25,
            mode_sq: modes,
            params: params.clone(),
        }
    }

    pub fn names(&self) -> Vec<String> {
        let mut names = vec![
            "n".to_string(),
            "h".to_string(),
            "quartic".to_string(),
            "sobolev".to_string(),
        ];
        for k in &self.mode_sq {
            names.push(format!("mode_sq_{k}"));
        }
        names
    }

    pub fn row(&self, field: &SpectralField) -> Result<Vec<f64>> {
        let mut row = vec![
            field.l2_norm_sq(),
            field.hamiltonian(&self.params)?,
            field.lp_norm_p(4.0)?,
            field.sobolev_norm_sq(self.gamma, self.params.m),
        ];
        for &k in &self.mode_sq {
            row.push(if k.unsigned_abs() as usize <= field.k_max() {
                field.mode(k).norm_sqr()
            } else {
                f64::NAN
            });
        }
        Ok(row)
    }
}

/// Recorded observable series of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `columns[c][i]` is observable `c` at `times[i]`.
    pub columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(&self.columns[idx])
    }

    /// CSV with a `t,<observables...>` header.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,{}", self.names.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            let row: Vec<String> = self.columns.iter().map(|c| c[i].to_string()).collect();
            writeln!(w, "{},{}", t, row.join(","))?;
        }
        Ok(())
    }
}

/// Integrate `flow` for `cfg.n_steps` steps, recording observables every
/// `cfg.record_every` steps (including the initial state).
pub fn trajectory<F: Flow>(
    flow: &mut F,
    rng: &mut ChaCha8Rng,
    cfg: &IntegratorCfg,
    obs: &Observables,
) -> Result<TimeSeries> {
    let names = obs.names();
    let n_records = cfg.n_steps / cfg.record_every + 1;
    let mut times = Vec::with_capacity(n_records);
    let mut columns = vec![Vec::with_capacity(n_records); names.len()];
    let mut record = |step: usize, flow: &F| -> Result<()> {
        let row = obs.row(&flow.snapshot())?;
        if row.iter().any(|v| !v.is_finite()) {
            let bad = row.iter().position(|v| !v.is_finite()).unwrap();
            return Err(CoreError::BlowUp {
                step,
                observable: names[bad].clone(),
            });
        }
        times.push(step as f64 * cfg.dt);
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
        Ok(())
    };
    record(0, flow)?;
    for step in 1..=cfg.n_steps {
        flow.step(cfg.dt, rng).map_err(|e| match e {
            CoreError::Numerical(msg) => CoreError::BlowUp {
                step,
                observable: msg,
            },
            other => other,
        })?;
        if !flow.mass().is_finite() {
            return Err(CoreError::BlowUp {
                step,
                observable: "n".into(),
            });
        }
        if step % cfg.record_every == 0 {
            record(step, flow)?;
        }
    }
    Ok(TimeSeries {
        times,
        names,
        columns,
    })
}
