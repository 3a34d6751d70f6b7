use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Prefactor convention for the chemical-potential term in the tilt
/// `exp(-beta * kappa_eff * N^r)`.
///
/// The literature uses all three of `kappa N^r`, `(kappa/r) N^r` and
/// `(kappa/2r) N^r` for the same object; `Bare` is the default and is the one
/// whose gradient `2 r kappa N^{r-1} phi` appears in the modified flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaConvention {
    #[default]
    Bare,
    OverR,
    OverTwoR,
}

/// Physical and ensemble parameters of the model, plus the spectral
/// truncation order.
///
/// The field lives on a circle of circumference `l` and is truncated to the
/// Fourier modes `k in {-k_max, ..., k_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Inverse temperature, > 0.
    pub beta: f64,
    /// Reference-measure mass, > 0.
    pub m: f64,
    /// Circle circumference, > 0.
    pub l: f64,
    /// Coupling of the power nonlinearity; focusing when > 0.
    pub lambda: f64,
    /// Nonlinearity order; default 4. Even integers get exact dealiased
    /// quadrature, other 2 < p < 6 values go through modulus powers on the
    /// padded grid.
    pub p: f64,
    /// Chemical-potential coefficient, >= 0.
    pub kappa: f64,
    /// Confinement exponent, > 1.
    pub r: f64,
    /// Truncation order (modes -k_max..=k_max).
    pub k_max: usize,
    /// Prefactor convention for the kappa term.
    #[serde(default)]
    pub kappa_convention: KappaConvention,
}

impl ModelParams {
    /// Parameters with everything trivial except the Gaussian reference:
    /// beta = m = 1 on a circle of length 2 pi.
    pub fn free(k_max: usize) -> Self {
        Self {
            beta: 1.0,
            m: 1.0,
            l: std::f64::consts::TAU,
            lambda: 0.0,
            p: 4.0,
            kappa: 0.0,
            r: 10.0,
            k_max,
            kappa_convention: KappaConvention::Bare,
        }
    }

    /// Number of retained modes, `2 k_max + 1`.
    pub fn n_modes(&self) -> usize {
        2 * self.k_max + 1
    }

    /// Dispersion with mass: `(2 pi k / L)^2 + m^2`.
    pub fn omega_tilde(&self, k: i64) -> f64 {
        let w = std::f64::consts::TAU * k as f64 / self.l;
        w * w + self.m * self.m
    }

    /// Per-mode Gaussian precision `theta_k = beta ((2 pi k/L)^2 + m^2)`.
    pub fn theta(&self, k: i64) -> f64 {
        self.beta * self.omega_tilde(k)
    }

    /// Covariance eigenvalue `nu_k = 1/theta_k`.
    pub fn nu(&self, k: i64) -> f64 {
        1.0 / self.theta(k)
    }

    /// Effective kappa coefficient after applying the convention.
    pub fn kappa_eff(&self) -> f64 {
        match self.kappa_convention {
            KappaConvention::Bare => self.kappa,
            KappaConvention::OverR => self.kappa / self.r,
            KappaConvention::OverTwoR => self.kappa / (2.0 * self.r),
        }
    }

    /// Smallest power-of-two grid that dealiases `|phi|^{p-2} phi` and the
    /// quadrature of `|phi|^p` (padding factor `ceil(p/2)` over the mode count).
    pub fn default_grid(&self) -> usize {
        let pad = (self.p / 2.0).ceil().max(2.0) as usize;
        (pad * self.n_modes() + 1).next_power_of_two()
    }

    /// Threshold on the confinement exponent for integrability of the tilt,
    /// optimized over the admissible Hölder order: `r > (p+2)/(6-p)`.
    pub fn integrability_threshold(&self) -> f64 {
        (self.p + 2.0) / (6.0 - self.p)
    }

    /// Library-level sanity of the parameter record.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(CoreError::Config(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.m > 0.0) {
            return Err(CoreError::Config(format!("m must be > 0, got {}", self.m)));
        }
        if !(self.l > 0.0) {
            return Err(CoreError::Config(format!("L must be > 0, got {}", self.l)));
        }
        if !(self.p >= 2.0) {
            return Err(CoreError::Config(format!("p must be >= 2, got {}", self.p)));
        }
        if !(self.kappa >= 0.0) {
            return Err(CoreError::Config(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.r > 1.0) {
            return Err(CoreError::Config(format!("r must be > 1, got {}", self.r)));
        }
        Ok(())
    }

    /// Windows required before sampling or evolving the grand-canonical
    /// ensemble: integrability demands `p < 6` and `kappa > 0` whenever the
    /// nonlinearity is focusing.
    pub fn validate_gibbs(&self) -> Result<()> {
        self.validate()?;
        if self.lambda > 0.0 && !(self.kappa > 0.0) {
            return Err(CoreError::Config(
                "kappa > 0 required whenever lambda > 0 (tilt integrability)".into(),
            ));
        }
        if self.lambda > 0.0 && !(self.p < 6.0) {
            return Err(CoreError::Config(format!(
                "focusing runs need p < 6, got p = {}",
                self.p
            )));
        }
        Ok(())
    }
}
