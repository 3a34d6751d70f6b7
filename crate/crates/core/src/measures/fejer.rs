//! Fejér kernel used to condition the reference measure on spheres of fixed
//! mass.

use crate::{CoreError, Result};

/// Order-`ell` Fejér kernel on `[-pi, pi]`, extended by zero outside:
/// `K_ell(t) = (1/ell) (sin(ell t / 2) / sin(t / 2))^2`.
///
/// Nonnegative, even, `K_ell(0) = ell`, and its integral over `[-pi, pi]`
/// is `2 pi`.
pub fn fejer_kernel(ell: usize, t: f64) -> f64 {
    assert!(ell >= 1, "Fejér order must be >= 1");
    if t.abs() > std::f64::consts::PI {
        return 0.0;
    }
    let u = 0.5 * t;
    if u.abs() < 1e-7 {
        // sin(l u)/sin(u) -> l (1 - (l^2 - 1) u^2 / 6)
        let l = ell as f64;
        let ratio = l * (1.0 - (l * l - 1.0) * u * u / 6.0);
        return ratio * ratio / l;
    }
    let ratio = (ell as f64 * u).sin() / u.sin();
    ratio * ratio / ell as f64
}

/// Conditioning target: Fejér order and the mass value to condition on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FejerSpec {
    pub ell: usize,
    pub n: f64,
}

impl FejerSpec {
    pub fn new(ell: usize, n: f64) -> Result<Self> {
        if ell < 1 {
            return Err(CoreError::Config("Fejér order must be >= 1".into()));
        }
        if !(n > 0.0) {
            return Err(CoreError::Config(format!(
                "conditioning mass must be > 0, got {n}"
            )));
        }
        Ok(Self { ell, n })
    }

    /// Log of the conditioning weight at mass `n_phi`; `-inf` off-support.
    pub fn log_weight(&self, n_phi: f64) -> f64 {
        let k = fejer_kernel(self.ell, self.n - n_phi);
        if k > 0.0 {
            k.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}
