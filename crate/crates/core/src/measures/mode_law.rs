//! Per-mode Gaussian law of the reference measure.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::field::SpectralField;
use crate::params::ModelParams;
use crate::{CoreError, Result};

/// Precisions and covariance eigenvalues of the reference measure, one entry
/// per retained mode `k in {-K, ..., K}` in ascending order.
///
/// Under the reference measure the mode variables are independent complex
/// Gaussians; each real component of mode `k` has variance `1/theta_k`, so
/// `E |X_k|^2 = 2/theta_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLaw {
    thetas: Vec<f64>,
    l: f64,
}

impl ModeLaw {
    pub fn from_params(params: &ModelParams) -> Self {
        let k_max = params.k_max as i64;
        let thetas = (-k_max..=k_max).map(|k| params.theta(k)).collect();
        Self {
            thetas,
            l: params.l,
        }
    }

    /// A single retained mode with the given precision; used by the
    /// one-dimensional oracles.
    pub fn single(theta: f64, l: f64) -> Self {
        Self {
            thetas: vec![theta],
            l,
        }
    }

    pub fn k_max(&self) -> usize {
        (self.thetas.len() - 1) / 2
    }

    pub fn circumference(&self) -> f64 {
        self.l
    }

    /// Precision of mode `k`.
    pub fn theta(&self, k: i64) -> f64 {
        self.thetas[(k + self.k_max() as i64) as usize]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Covariance eigenvalue `nu_k = 1/theta_k`.
    pub fn nu(&self, k: i64) -> f64 {
        1.0 / self.theta(k)
    }

    pub fn smallest_theta(&self) -> f64 {
        self.thetas.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Mean of `N(phi) = sum |X_k|^2` under the reference measure.
    pub fn mean_n(&self) -> f64 {
        self.thetas.iter().map(|t| 2.0 / t).sum()
    }

    /// Variance of `N(phi)` under the reference measure.
    pub fn var_n(&self) -> f64 {
        self.thetas.iter().map(|t| 4.0 / (t * t)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.iter().any(|&t| !(t > 0.0)) {
            return Err(CoreError::Config("mode precisions must be positive".into()));
        }
        let k_max = self.k_max() as i64;
        for k in 1..=k_max {
            if (self.theta(k) - self.theta(-k)).abs() > 1e-12 * self.theta(k) {
                return Err(CoreError::Config(format!(
                    "mode precisions must be symmetric in k (k = {k})"
                )));
            }
            if self.theta(k) <= self.theta(k - 1) {
                return Err(CoreError::Config(format!(
                    "mode precisions must increase in |k| (k = {k})"
                )));
            }
        }
        Ok(())
    }

    /// One exact draw from the reference measure.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SpectralField {
        let coeffs = self
            .thetas
            .iter()
            .map(|&theta| {
                let s = (1.0 / theta).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        SpectralField::from_coeffs(coeffs, self.l).expect("finite by construction")
    }
}

/// Exact draw from the truncated Gaussian reference measure.
pub fn sample_free<R: Rng>(rng: &mut R, params: &ModelParams) -> SpectralField {
    ModeLaw::from_params(params).sample(rng)
}
