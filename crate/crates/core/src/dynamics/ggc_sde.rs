//! The grand-canonical stochastic flow: the Hamiltonian vector field plus an
//! Ornstein-Uhlenbeck dissipation/noise pair whose invariant law is the
//! tilted Gibbs measure of the truncated system.
//!
//! The drift dissipates along the gradient of the full log-density energy
//! `E = H + (m^2/2) N + kappa_eff N^r`, so that for `lambda = kappa = 0` the
//! chain is exactly the per-mode OU process with the Gaussian reference as its
//! stationary law, at any step size.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::noise::NoiseSpec;
use super::trajectory::Flow;
use crate::field::{dealias_grid, SpectralField};
use crate::params::ModelParams;
use crate::{CoreError, Result};

/// Time-stepping scheme for the stochastic flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdeScheme {
    /// Strang composition with the exact OU transition for the linear part.
    #[default]
    StrangOu,
    /// Plain Euler-Maruyama on the full drift; subject to the linear
    /// stability constraint `dt * max_k omega_k <= 1`.
    EulerMaruyama,
}

/// Stochastic integrator state on the retained modes.
#[derive(Debug, Clone)]
pub struct GgcSdeFlow {
    modes: Vec<Complex64>,
    params: ModelParams,
    noise: NoiseSpec,
    scheme: SdeScheme,
    m_grid: usize,
    dt_cached: f64,
    // Exact OU half-step tables: decay, rotation, injected std per component.
    ou_decay: Vec<f64>,
    ou_rot: Vec<Complex64>,
    ou_std: Vec<f64>,
}

impl GgcSdeFlow {
    pub fn new(
        init: &SpectralField,
        params: &ModelParams,
        noise: &NoiseSpec,
        scheme: SdeScheme,
    ) -> Result<Self> {
        params.validate()?;
        if noise.k_max() != params.k_max || init.k_max() != params.k_max {
            return Err(CoreError::Config(format!(
                "truncation mismatch: field K = {}, params K = {}, noise K = {}",
                init.k_max(),
                params.k_max,
                noise.k_max()
            )));
        }
        Ok(Self {
            modes: init.coeffs().to_vec(),
            params: params.clone(),
            noise: noise.clone(),
            scheme,
            m_grid: dealias_grid(params.k_max, params.p),
            dt_cached: f64::NAN,
            ou_decay: Vec::new(),
            ou_rot: Vec::new(),
            ou_std: Vec::new(),
        })
    }

    fn k_of(&self, idx: usize) -> i64 {
        idx as i64 - self.params.k_max as i64
    }

    fn rebuild_ou_tables(&mut self, dt: f64) {
        let half = dt / 2.0;
        let n = self.modes.len();
        let mut decay = Vec::with_capacity(n);
        let mut rot = Vec::with_capacity(n);
        let mut std = Vec::with_capacity(n);
        for idx in 0..n {
            let k = self.k_of(idx);
            let omega = self.params.omega_tilde(k);
            let sigma = self.noise.sigma(k);
            // Mean reversion of each real component.
            let a = 0.5 * self.params.beta * sigma * sigma * omega;
            let d = (-a * half).exp();
            decay.push(d);
            rot.push(Complex64::from_polar(1.0, -omega * half));
            // Exact transition variance: sigma^2 (1 - d^2) / (2a) = (1 - d^2)/theta.
            std.push(((1.0 - d * d) / self.params.theta(k)).sqrt());
        }
        self.ou_decay = decay;
        self.ou_rot = rot;
        self.ou_std = std;
        self.dt_cached = dt;
    }

    /// Exact transition of the linear OU part over half a step.
    fn ou_half_step<R: Rng>(&mut self, rng: &mut R) {
        for idx in 0..self.modes.len() {
            let g = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            self.modes[idx] =
                self.modes[idx] * self.ou_rot[idx] * self.ou_decay[idx] + self.ou_std[idx] * g;
        }
    }

    fn mass_now(&self) -> f64 {
        self.modes.iter().map(|c| c.norm_sqr()).sum()
    }

    fn as_field(&self) -> SpectralField {
        SpectralField::from_coeffs(self.modes.to_vec(), self.params.l)
            .expect("state stays finite between checks")
    }

    /// Exact rotation by the Hamiltonian part of the nonlinear drift over
    /// `dt`: pointwise phase from the power nonlinearity, global phase from
    /// the mass confinement. Both preserve every modulus.
    fn j_phase(&mut self, dt: f64) -> Result<()> {
        let kappa = self.params.kappa_eff();
        let global = if kappa != 0.0 {
            let n = self.mass_now();
            -2.0 * self.params.r * kappa * n.powf(self.params.r - 1.0) * dt
        } else {
            0.0
        };
        if self.params.lambda != 0.0 {
            let field = self.as_field();
            let mut grid = field.transform(self.m_grid)?;
            for v in grid.values.iter_mut() {
                let amp = v.norm_sqr();
                let pow = if self.params.p == 4.0 {
                    amp
                } else {
                    amp.powf((self.params.p - 2.0) / 2.0)
                };
                *v *= Complex64::from_polar(1.0, self.params.lambda * pow * dt + global);
            }
            let back = grid.inverse_transform(self.params.k_max)?;
            self.modes.copy_from_slice(back.coeffs());
        } else if global != 0.0 {
            let ph = Complex64::from_polar(1.0, global);
            for c in self.modes.iter_mut() {
                *c *= ph;
            }
        }
        Ok(())
    }

    /// Nonlinear part of the energy gradient,
    /// `-lambda |phi|^{p-2} phi + 2 r kappa_eff N^{r-1} phi`, in mode space.
    fn nonlinear_gradient(&self) -> Result<Vec<Complex64>> {
        let mut g = vec![Complex64::ZERO; self.modes.len()];
        let kappa = self.params.kappa_eff();
        if kappa != 0.0 {
            let n = self.mass_now();
            let coeff = 2.0 * self.params.r * kappa * n.powf(self.params.r - 1.0);
            for (gi, c) in g.iter_mut().zip(&self.modes) {
                *gi += coeff * c;
            }
        }
        if self.params.lambda != 0.0 {
            let nl = self.as_field().nonlinear_term(self.params.p)?;
            for (gi, w) in g.iter_mut().zip(nl.coeffs()) {
                *gi -= self.params.lambda * w;
            }
        }
        Ok(g)
    }

    /// Euler step of the dissipative nonlinear drift `-(beta/2) sigma^2 g_nl`.
    fn dissipative_euler(&mut self, dt: f64) -> Result<()> {
        if self.params.lambda == 0.0 && self.params.kappa_eff() == 0.0 {
            return Ok(());
        }
        let g = self.nonlinear_gradient()?;
        for idx in 0..self.modes.len() {
            let k = self.k_of(idx);
            let s2 = self.noise.sigma(k).powi(2);
            self.modes[idx] -= dt * 0.5 * self.params.beta * s2 * g[idx];
        }
        Ok(())
    }

    fn step_strang<R: Rng>(&mut self, dt: f64, rng: &mut R) -> Result<()> {
        if dt != self.dt_cached {
            self.rebuild_ou_tables(dt);
        }
        self.ou_half_step(rng);
        self.j_phase(dt / 2.0)?;
        self.dissipative_euler(dt)?;
        self.j_phase(dt / 2.0)?;
        self.ou_half_step(rng);
        Ok(())
    }

    fn step_euler<R: Rng>(&mut self, dt: f64, rng: &mut R) -> Result<()> {
        let nl = self.nonlinear_gradient()?;
        let sqrt_dt = dt.sqrt();
        for idx in 0..self.modes.len() {
            let k = self.k_of(idx);
            let omega = self.params.omega_tilde(k);
            let sigma = self.noise.sigma(k);
            let grad = omega * self.modes[idx] + nl[idx];
            let drift = Complex64::new(0.0, -1.0) * grad
                - 0.5 * self.params.beta * sigma * sigma * grad;
            let g = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            self.modes[idx] += dt * drift + sigma * sqrt_dt * g;
        }
        Ok(())
    }

    pub fn step_rng<R: Rng>(&mut self, dt: f64, rng: &mut R) -> Result<()> {
        match self.scheme {
            SdeScheme::StrangOu => self.step_strang(dt, rng)?,
            SdeScheme::EulerMaruyama => self.step_euler(dt, rng)?,
        }
        let n = self.mass_now();
        if !n.is_finite() {
            return Err(CoreError::Numerical(
                "stochastic flow produced a non-finite state".into(),
            ));
        }
        Ok(())
    }
}

impl Flow for GgcSdeFlow {
    fn step(&mut self, dt: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        self.step_rng(dt, rng)
    }

    fn snapshot(&self) -> SpectralField {
        self.as_field()
    }

    fn mass(&self) -> f64 {
        self.mass_now()
    }
}

/// One step of the grand-canonical SDE on a band-limited field.
pub fn ggc_sde_step<R: Rng>(
    field: &SpectralField,
    dt: f64,
    rng: &mut R,
    params: &ModelParams,
    noise: &NoiseSpec,
) -> Result<SpectralField> {
    let mut flow = GgcSdeFlow::new(field, params, noise, SdeScheme::StrangOu)?;
    flow.step_rng(dt, rng)?;
    Ok(flow.snapshot())
}
