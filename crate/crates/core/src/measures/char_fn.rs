//! Characteristic products of the mass observable and the density obtained
//! by Fourier inversion.

use num_complex::Complex64;
use rand::Rng;

use super::mode_law::ModeLaw;
use crate::{CoreError, Result};

/// Joint characteristic product
/// `F(xi, eps) = prod_k (1 - 2 i xi / theta_k - 2 eps / theta_k^{1-gamma})^{-1}`
/// over the retained modes: the joint transform of `N(phi)` and the squared
/// fractional Sobolev norm of order `gamma`.
pub fn char_product(xi: f64, eps: f64, gamma: f64, law: &ModeLaw) -> Result<Complex64> {
    check_domain(eps, gamma, law)?;
    let mut f = Complex64::new(1.0, 0.0);
    for &theta in law.thetas() {
        let factor = Complex64::new(1.0 - 2.0 * eps / theta.powf(1.0 - gamma), -2.0 * xi / theta);
        f /= factor;
    }
    Ok(f)
}

/// `Re log F(xi, eps)`, usable at large `xi` where the product underflows.
pub fn char_product_log_re(xi: f64, eps: f64, gamma: f64, law: &ModeLaw) -> Result<f64> {
    check_domain(eps, gamma, law)?;
    let mut log_re = 0.0;
    for &theta in law.thetas() {
        let re = 1.0 - 2.0 * eps / theta.powf(1.0 - gamma);
        let im = 2.0 * xi / theta;
        log_re -= 0.5 * (re * re + im * im).ln();
    }
    Ok(log_re)
}

fn check_domain(eps: f64, gamma: f64, law: &ModeLaw) -> Result<()> {
    if eps != 0.0 && gamma >= 0.5 {
        return Err(CoreError::Domain(format!(
            "Sobolev order gamma must be < 1/2, got {gamma}"
        )));
    }
    let theta_min = law.smallest_theta();
    if 2.0 * eps > theta_min.powf(1.0 - gamma) {
        return Err(CoreError::Domain(format!(
            "2 eps = {} exceeds theta_min^(1-gamma) = {}",
            2.0 * eps,
            theta_min.powf(1.0 - gamma)
        )));
    }
    Ok(())
}

/// Controls for the characteristic-function inversion.
#[derive(Debug, Clone)]
pub struct InversionCfg {
    /// Upper end of the density grid.
    pub n_max: f64,
    /// Number of density grid points.
    pub n_points: usize,
    /// Frequency step of the trapezoid rule.
    pub xi_step: f64,
    /// Frequency cutoff.
    pub xi_max: f64,
    /// Gaussian damping width: the integrand is multiplied by
    /// `exp(-(xi/damp_width)^2)`, smoothing the density over a scale
    /// `sqrt(2)/damp_width`.
    pub damp_width: f64,
}

impl InversionCfg {
    /// Defaults sized from the spread of `N` under the law: the damping
    /// smooths over well below the density's own scale, and the frequency
    /// grid resolves oscillations out to `n_max`.
    pub fn auto(law: &ModeLaw) -> Self {
        let mean = law.mean_n();
        let std = law.var_n().sqrt();
        let n_max = (mean + 12.0 * std).max(2.0 * mean);
        let sigma_smooth = (std / 100.0).min(0.01).max(1e-4);
        let damp_width = std::f64::consts::SQRT_2 / sigma_smooth;
        // The damping alone reaches 1e-13 by 5.5 * damp_width; the product may
        // decay much sooner, so scan for the point where it does.
        let mut xi_f = 1.0;
        while xi_f < 5.5 * damp_width {
            let log_abs = char_product_log_re(xi_f, 0.0, 0.0, law).unwrap();
            if log_abs < -30.0 {
                break;
            }
            xi_f *= 1.5;
        }
        let xi_max = xi_f.min(5.5 * damp_width);
        let xi_step = (std::f64::consts::TAU / (8.0 * n_max)).min(xi_max / 400.0);
        Self {
            n_max,
            n_points: 2048,
            xi_step,
            xi_max,
            damp_width,
        }
    }
}

/// Density of `N(phi)` on a uniform grid, from numerical Fourier inversion of
/// the characteristic product.
#[derive(Debug, Clone)]
pub struct NDensity {
    pub n_grid: Vec<f64>,
    pub rho: Vec<f64>,
    step: f64,
}

/// Invert `xi -> F(xi, 0)` to the density of `N(phi)`.
pub fn density_of_n(law: &ModeLaw, cfg: &InversionCfg) -> Result<NDensity> {
    let n_xi = (cfg.xi_max / cfg.xi_step).ceil() as usize;
    let factors: Vec<Complex64> = (1..=n_xi)
        .map(|j| {
            let xi = j as f64 * cfg.xi_step;
            let damp = (-(xi / cfg.damp_width) * (xi / cfg.damp_width)).exp();
            char_product(xi, 0.0, 0.0, law).map(|f| f * damp)
        })
        .collect::<Result<_>>()?;
    let step = cfg.n_max / (cfg.n_points - 1) as f64;
    let n_grid: Vec<f64> = (0..cfg.n_points).map(|i| i as f64 * step).collect();
    let rho: Vec<f64> = n_grid
        .iter()
        .map(|&n| {
            // rho(n) = (1/2pi) int e^{-i xi n} F(xi) d xi, using F(-xi) = conj F(xi).
            let mut acc = 0.5; // F(0) = 1, half weight for the two-sided trapezoid
            for (j, f) in factors.iter().enumerate() {
                let xi = (j + 1) as f64 * cfg.xi_step;
                acc += (Complex64::new(0.0, -xi * n).exp() * f).re;
            }
            acc * cfg.xi_step / std::f64::consts::PI
        })
        .collect();
    Ok(NDensity { n_grid, rho, step })
}

impl NDensity {
    /// Linear interpolation; zero outside the grid.
    pub fn eval(&self, n: f64) -> f64 {
        if n < 0.0 || n > *self.n_grid.last().unwrap() {
            return 0.0;
        }
        let idx = (n / self.step) as usize;
        if idx + 1 >= self.rho.len() {
            return *self.rho.last().unwrap();
        }
        let frac = (n - self.n_grid[idx]) / self.step;
        self.rho[idx] * (1.0 - frac) + self.rho[idx + 1] * frac
    }

    /// Trapezoid mass over the stored grid.
    pub fn total_mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.rho.len() {
            acc += 0.5 * (self.rho[i] + self.rho[i - 1]) * self.step;
        }
        acc
    }

    pub fn min_value(&self) -> f64 {
        self.rho.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Contract check: mass within `tol_mass` of 1 and negativity within
    /// `tol_neg` of 0.
    pub fn validate(&self, tol_mass: f64, tol_neg: f64) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > tol_mass {
            return Err(CoreError::InversionTolerance(format!(
                "density mass {mass} deviates from 1 by more than {tol_mass}"
            )));
        }
        if self.min_value() < -tol_neg {
            return Err(CoreError::InversionTolerance(format!(
                "density dips to {} below -{tol_neg}",
                self.min_value()
            )));
        }
        Ok(())
    }

    /// Inverse-CDF draw from the (negativity-clipped, renormalized) density.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let clipped: Vec<f64> = self.rho.iter().map(|&r| r.max(0.0)).collect();
        let mut cdf = Vec::with_capacity(clipped.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..clipped.len() {
            acc += 0.5 * (clipped[i] + clipped[i - 1]) * self.step;
            cdf.push(acc);
        }
        let target = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c < target).max(1);
        let (c0, c1) = (cdf[idx - 1], cdf[idx]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        self.n_grid[idx - 1] + frac * self.step
    }
}
