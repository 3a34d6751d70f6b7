//! The noise operator: a power of the reference covariance, acting mode by
//! mode.

use crate::params::ModelParams;
use crate::{CoreError, Result};

/// Default admissible window for the noise exponent: `7/16 < s < 1/2`, so
/// that `sigma^2 C^{-1} = (beta (m^2 - Delta))^{1-2s}` sits between the
/// identity and `(m^2 - Delta)^gamma` with `gamma < 1/8` (at `beta = m = 1`),
/// while `sigma^2` stays trace-class as the truncation grows.
pub const S_WINDOW: (f64, f64) = (7.0 / 16.0, 0.5);

/// Per-mode noise amplitudes `sigma_k = nu_k^s` for `k in {-K, ..., K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub s: f64,
    sigmas: Vec<f64>,
    k_max: usize,
}

impl NoiseSpec {
    /// Custom per-mode amplitudes (exploratory runs and oracles); the array
    /// must be odd-length, symmetric and positive.
    pub fn from_sigmas(s_label: f64, sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.len() % 2 == 0 || sigmas.is_empty() {
            return Err(CoreError::Config(
                "sigma array must have odd length 2K+1".into(),
            ));
        }
        if sigmas.iter().any(|&x| !(x > 0.0)) {
            return Err(CoreError::Config("sigma amplitudes must be positive".into()));
        }
        let k_max = (sigmas.len() - 1) / 2;
        for i in 0..k_max {
            if (sigmas[i] - sigmas[sigmas.len() - 1 - i]).abs() > 1e-12 * sigmas[i] {
                return Err(CoreError::Config("sigma amplitudes must be symmetric".into()));
            }
        }
        Ok(Self {
            s: s_label,
            sigmas,
            k_max,
        })
    }

    /// Amplitude of mode `k`.
    pub fn sigma(&self, k: i64) -> f64 {
        self.sigmas[(k + self.k_max as i64) as usize]
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `sum_k sigma_k^2` over complex modes: the trace surrogate at this
    /// truncation. The trace over real degrees of freedom is twice this.
    pub fn sigma_sq_sum(&self) -> f64 {
        self.sigmas.iter().map(|s| s * s).sum()
    }

    /// Trace of `sigma^2` over the real phase space (two real degrees per
    /// mode).
    pub fn trace_real(&self) -> f64 {
        2.0 * self.sigma_sq_sum()
    }
}

/// Build the noise operator `sigma = C^s`, enforcing the default exponent
/// window.
pub fn make_noise(params: &ModelParams, s: f64) -> Result<NoiseSpec> {
    if !(s > S_WINDOW.0 && s < S_WINDOW.1) {
        return Err(CoreError::Config(format!(
            "noise exponent s = {s} outside ({}, {}); use the override for exploratory runs",
            S_WINDOW.0, S_WINDOW.1
        )));
    }
    Ok(make_noise_unchecked(params, s))
}

/// Build the noise operator without the window guard (exploratory runs).
pub fn make_noise_unchecked(params: &ModelParams, s: f64) -> NoiseSpec {
    let k_max = params.k_max as i64;
    let sigmas = (-k_max..=k_max).map(|k| params.nu(k).powf(s)).collect();
    NoiseSpec {
        s,
        sigmas,
        k_max: params.k_max,
    }
}

/// Check the relaxation theorem's operator window
/// `I <= sigma^2 C^{-1} <= (m^2 - Delta)^gamma` for some `gamma < 1/8`,
/// mode by mode at this truncation.
pub fn noise_window_check(params: &ModelParams, noise: &NoiseSpec) -> Result<()> {
    let mut gamma_required: f64 = 0.0;
    for k in -(params.k_max as i64)..=params.k_max as i64 {
        // sigma_k^2 / nu_k = (beta omega_k)^{1 - 2s}
        let ratio = noise.sigma(k).powi(2) * params.theta(k);
        if ratio < 1.0 - 1e-12 {
            return Err(CoreError::Config(format!(
                "sigma^2 C^-1 = {ratio} < 1 at mode {k}; noise too weak for the relaxation window"
            )));
        }
        let omega = params.omega_tilde(k);
        if omega > 1.0 + 1e-12 {
            gamma_required = gamma_required.max(ratio.ln() / omega.ln());
        } else if ratio > 1.0 + 1e-9 {
            return Err(CoreError::Config(format!(
                "sigma^2 C^-1 = {ratio} > 1 at mode {k} where omega <= 1; no gamma < 1/8 works"
            )));
        }
    }
    if gamma_required >= 0.125 {
        return Err(CoreError::Config(format!(
            "sigma^2 C^-1 needs gamma = {gamma_required} >= 1/8; noise too strong for the window"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amplitudes_and_trace() {
        let params = ModelParams::free(8);
        let noise = make_noise(&params, 0.47).unwrap();
        // nu_0 = 1 at beta = m = 1, so sigma_0 = 1.
        assert_relative_eq!(noise.sigma(0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(noise.sigma(1), 0.5f64.powf(0.47), max_relative = 1e-14);
        assert_relative_eq!(noise.sigma(-1), noise.sigma(1), max_relative = 1e-15);
        assert!(noise.sigma_sq_sum().is_finite());
        assert_relative_eq!(noise.trace_real(), 2.0 * noise.sigma_sq_sum());
    }

    #[test]
    fn trace_surrogate_decreases_in_s() {
        // nu_k <= 1 here, so larger s damps every mode.
        let params = ModelParams::free(16);
        let a = make_noise(&params, 0.45).unwrap().sigma_sq_sum();
        let b = make_noise(&params, 0.49).unwrap().sigma_sq_sum();
        assert!(b < a);
    }

    #[test]
    fn window_is_enforced_without_override() {
        let params = ModelParams::free(4);
        assert!(make_noise(&params, 0.3).is_err());
        assert!(make_noise(&params, 0.55).is_err());
        assert!(make_noise(&params, 0.47).is_ok());
        // Exploratory override path.
        let spec = make_noise_unchecked(&params, 0.3);
        assert_eq!(spec.s, 0.3);
    }

    #[test]
    fn s_near_half_approaches_unit_ratio() {
        // As s -> 1/2, sigma_k^2 C^-1 -> I.
        let params = ModelParams::free(8);
        let noise = make_noise_unchecked(&params, 0.4999999);
        for k in -8i64..=8 {
            let ratio = noise.sigma(k).powi(2) * params.theta(k);
            assert!((ratio - 1.0).abs() < 1e-5, "mode {k}: ratio {ratio}");
        }
    }

    #[test]
    fn theorem_window_check() {
        let params = ModelParams::free(32);
        let good = make_noise(&params, 0.47).unwrap();
        noise_window_check(&params, &good).unwrap();
        let bad = make_noise_unchecked(&params, 0.3);
        assert!(noise_window_check(&params, &bad).is_err());
    }
}
