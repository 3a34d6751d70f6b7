//! Truncated Fourier representation of the complex field on the circle and
//! the functionals built from it.
//!
//! Conventions: the field is expanded in the orthonormal basis
//! `u_k(x) = L^{-1/2} exp(2 pi i k x / L)` for `k in {-K, ..., K}`, so the
//! squared L2 norm is the plain coefficient sum `sum_k |c_k|^2`. Gradients are
//! taken with respect to the real inner product `Re <phi, psi>_{L2}` and are
//! stored as complex fields: the directional derivative of a functional `F`
//! along `psi` equals `Re <grad F, psi>`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::params::ModelParams;
use crate::{CoreError, Result};

thread_local! {
    static FFT_CACHE: RefCell<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>> =
        RefCell::new(HashMap::new());
}

/// Run the unnormalized DFT `sum_j x_j e^{-2 pi i jk/M}` in place.
pub(crate) fn dft_forward(buf: &mut [Complex64]) {
    let plan = FFT_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        let entry = c.entry(buf.len()).or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (
                planner.plan_fft_forward(buf.len()),
                planner.plan_fft_inverse(buf.len()),
            )
        });
        entry.0.clone()
    });
    plan.process(buf);
}

/// Run the unnormalized inverse DFT `sum_k x_k e^{+2 pi i jk/M}` in place.
pub(crate) fn dft_inverse(buf: &mut [Complex64]) {
    let plan = FFT_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        let entry = c.entry(buf.len()).or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (
                planner.plan_fft_forward(buf.len()),
                planner.plan_fft_inverse(buf.len()),
            )
        });
        entry.1.clone()
    });
    plan.process(buf);
}

/// Spectral representation of the field: coefficients of `u_k` for
/// `k in {-k_max, ..., k_max}`, stored in ascending `k` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
    k_max: usize,
    l: f64,
}

/// Collocation image of the field on `m` uniform grid points `x_j = j L / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub values: Vec<Complex64>,
    pub l: f64,
}

impl SpectralField {
    pub fn zeros(k_max: usize, l: f64) -> Self {
        Self {
            coeffs: vec![Complex64::ZERO; 2 * k_max + 1],
            k_max,
            l,
        }
    }

    /// Build from coefficients in ascending `k` order; the length must be odd.
    pub fn from_coeffs(coeffs: Vec<Complex64>, l: f64) -> Result<Self> {
        if coeffs.len() % 2 == 0 || coeffs.is_empty() {
            return Err(CoreError::Malformed(format!(
                "mode array must have odd length 2K+1, got {}",
                coeffs.len()
            )));
        }
        if !(l > 0.0) {
            return Err(CoreError::Config(format!("circumference must be > 0, got {l}")));
        }
        let k_max = (coeffs.len() - 1) / 2;
        let field = Self { coeffs, k_max, l };
        if !field.is_finite() {
            return Err(CoreError::Malformed("non-finite mode coefficient".into()));
        }
        Ok(field)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn circumference(&self) -> f64 {
        self.l
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of `u_k`.
    pub fn mode(&self, k: i64) -> Complex64 {
        self.coeffs[(k + self.k_max as i64) as usize]
    }

    pub fn set_mode(&mut self, k: i64, c: Complex64) {
        self.coeffs[(k + self.k_max as i64) as usize] = c;
    }

    /// Wave indices in storage order.
    pub fn k_range(&self) -> impl Iterator<Item = i64> {
        -(self.k_max as i64)..=(self.k_max as i64)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `phi + s * psi` on the common mode set.
    pub fn add_scaled(&self, other: &SpectralField, s: f64) -> SpectralField {
        assert_eq!(self.k_max, other.k_max);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + s * b)
            .collect();
        SpectralField {
            coeffs,
            k_max: self.k_max,
            l: self.l,
        }
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        SpectralField {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            k_max: self.k_max,
            l: self.l,
        }
    }

    /// Re-truncate (or zero-pad) to a new mode order.
    pub fn truncated(&self, k_max: usize) -> SpectralField {
        let mut out = SpectralField::zeros(k_max, self.l);
        let keep = k_max.min(self.k_max) as i64;
        for k in -keep..=keep {
            out.set_mode(k, self.mode(k));
        }
        out
    }

    /// Evaluate on `m` collocation points. Fails when the grid cannot hold
    /// the modes.
    pub fn transform(&self, m: usize) -> Result<PhysicalField> {
        if m < 2 * self.k_max + 2 {
            return Err(CoreError::GridTooSmall {
                m,
                required: 2 * self.k_max + 2,
            });
        }
        let mut buf = vec![Complex64::ZERO; m];
        for k in self.k_range() {
            let bin = (k.rem_euclid(m as i64)) as usize;
            buf[bin] = self.mode(k);
        }
        dft_inverse(&mut buf);
        let scale = 1.0 / self.l.sqrt();
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(PhysicalField {
            values: buf,
            l: self.l,
        })
    }

    /// Squared L2 norm `N(phi) = sum_k |c_k|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `int |phi|^p dx` by dealiased grid quadrature on the default grid.
    pub fn lp_norm_p(&self, p: f64) -> Result<f64> {
        self.lp_norm_p_on_grid(p, dealias_grid(self.k_max, p))
    }

    /// `int |phi|^p dx` on an explicit grid; errors when padding is below
    /// the `ceil(p/2)` dealiasing factor.
    pub fn lp_norm_p_on_grid(&self, p: f64, m: usize) -> Result<f64> {
        if p < 2.0 {
            return Err(CoreError::Domain(format!("p must be >= 2, got {p}")));
        }
        let required = dealias_requirement(self.k_max, p);
        if m < required {
            return Err(CoreError::Dealiasing { m, p, required });
        }
        let grid = self.transform(m)?;
        let sum: f64 = grid.values.iter().map(|v| v.norm_sqr().powf(p / 2.0)).sum();
        Ok(sum * self.l / m as f64)
    }

    /// Squared fractional Sobolev norm `sum_k ((2 pi k/L)^2 + m^2)^{2 gamma} |c_k|^2`.
    pub fn sobolev_norm_sq(&self, gamma: f64, mass: f64) -> f64 {
        self.k_range()
            .map(|k| {
                let w = std::f64::consts::TAU * k as f64 / self.l;
                (w * w + mass * mass).powf(2.0 * gamma) * self.mode(k).norm_sqr()
            })
            .sum()
    }

    /// Squared homogeneous Sobolev norm `sum_k (2 pi k/L)^{4 gamma} |c_k|^2`
    /// (the `k = 0` mode is annihilated).
    pub fn homogeneous_sobolev_norm_sq(&self, gamma: f64) -> f64 {
        self.k_range()
            .filter(|&k| k != 0)
            .map(|k| {
                let w = std::f64::consts::TAU * k as f64 / self.l;
                (w * w).powf(2.0 * gamma) * self.mode(k).norm_sqr()
            })
            .sum()
    }

    /// Grid estimate of the order-`alpha` Hölder seminorm, searching all grid
    /// pairs with circle-metric offsets up to `m/2`. A lower bound of the true
    /// seminorm that is nondecreasing in `m`.
    pub fn holder_seminorm(&self, alpha: f64, m: usize) -> Result<f64> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(CoreError::Domain(format!("alpha must be in (0,1), got {alpha}")));
        }
        let grid = self.transform(m)?;
        let vals = &grid.values;
        let mut best: f64 = 0.0;
        for offset in 1..=m / 2 {
            let dist = self.l * offset as f64 / m as f64;
            let denom = dist.powf(alpha);
            let mut max_jump: f64 = 0.0;
            for j in 0..m {
                let k = (j + offset) % m;
                let jump = (vals[k] - vals[j]).norm_sqr();
                if jump > max_jump {
                    max_jump = jump;
                }
            }
            let ratio = max_jump.sqrt() / denom;
            if ratio > best {
                best = ratio;
            }
        }
        Ok(best)
    }

    /// Sup norm estimate from the grid.
    pub fn sup_norm(&self, m: usize) -> Result<f64> {
        let grid = self.transform(m)?;
        Ok(grid
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max))
    }

    /// Kinetic energy `1/2 sum_k (2 pi k/L)^2 |c_k|^2`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self
            .k_range()
            .map(|k| {
                let w = std::f64::consts::TAU * k as f64 / self.l;
                w * w * self.mode(k).norm_sqr()
            })
            .sum::<f64>()
    }

    /// Hamiltonian `H(phi) = 1/2 ||phi'||_2^2 - (lambda/p) ||phi||_p^p`.
    pub fn hamiltonian(&self, params: &ModelParams) -> Result<f64> {
        let quartic = if params.lambda == 0.0 {
            0.0
        } else {
            self.lp_norm_p(params.p)?
        };
        Ok(self.kinetic_energy() - params.lambda / params.p * quartic)
    }

    /// Gaussian part of the energy, `1/2 ||phi'||^2 + (m^2/2) ||phi||^2`
    /// = `1/2 sum_k omega_k |c_k|^2`.
    pub fn gaussian_energy(&self, params: &ModelParams) -> f64 {
        0.5 * self
            .k_range()
            .map(|k| params.omega_tilde(k) * self.mode(k).norm_sqr())
            .sum::<f64>()
    }

    /// Full log-density energy of the tilted measure:
    /// `E(phi) = H(phi) + (m^2/2) N(phi) + kappa_eff N(phi)^r`, so that the
    /// tilted density against the formal flat measure is `exp(-beta E)`.
    pub fn effective_energy(&self, params: &ModelParams) -> Result<f64> {
        let n = self.l2_norm_sq();
        let kappa_term = if params.kappa_eff() == 0.0 {
            0.0
        } else {
            params.kappa_eff() * n.powf(params.r)
        };
        Ok(self.hamiltonian(params)? + 0.5 * params.m * params.m * n + kappa_term)
    }

    /// Gradient of [`Self::effective_energy`] with respect to the real inner
    /// product: `(-Delta + m^2) phi - lambda |phi|^{p-2} phi
    /// + 2 r kappa_eff N^{r-1} phi`.
    pub fn grad_effective_energy(&self, params: &ModelParams) -> Result<SpectralField> {
        let n = self.l2_norm_sq();
        let kap = if params.kappa_eff() == 0.0 {
            0.0
        } else {
            2.0 * params.r * params.kappa_eff() * n.powf(params.r - 1.0)
        };
        let mut out = SpectralField::zeros(self.k_max, self.l);
        for k in self.k_range() {
            out.set_mode(k, (params.omega_tilde(k) + kap) * self.mode(k));
        }
        if params.lambda != 0.0 {
            let nl = self.nonlinear_term(params.p)?;
            for k in self.k_range() {
                out.set_mode(k, out.mode(k) - params.lambda * nl.mode(k));
            }
        }
        Ok(out)
    }

    /// Modes of the pointwise power `|phi|^{p-2} phi`, dealiased and truncated
    /// back to this field's band.
    pub fn nonlinear_term(&self, p: f64) -> Result<SpectralField> {
        let m = dealias_grid(self.k_max, p);
        let mut grid = self.transform(m)?;
        for v in grid.values.iter_mut() {
            let a = v.norm_sqr();
            *v *= if p == 4.0 { a } else { a.powf((p - 2.0) / 2.0) };
        }
        grid.inverse_transform(self.k_max)
    }

    /// Binary record: `K`, `L`, `M` as little-endian 64-bit values, then
    /// interleaved re/im doubles in ascending `k` order.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        let m_hint = dealias_grid(self.k_max, 4.0) as u64;
        w.write_all(&(self.k_max as u64).to_le_bytes())?;
        w.write_all(&self.l.to_le_bytes())?;
        w.write_all(&m_hint.to_le_bytes())?;
        for c in &self.coeffs {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let k_max = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let l = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let m_hint = u64::from_le_bytes(b8) as usize;
        if m_hint < 2 * k_max + 2 {
            return Err(CoreError::Malformed(format!(
                "grid hint {m_hint} below the mode count for K = {k_max}"
            )));
        }
        let mut coeffs = Vec::with_capacity(2 * k_max + 1);
        for _ in 0..2 * k_max + 1 {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            coeffs.push(Complex64::new(re, im));
        }
        Self::from_coeffs(coeffs, l)
    }

    /// CSV export `k,re,im` with a header row.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "k,re,im")?;
        for k in self.k_range() {
            let c = self.mode(k);
            writeln!(w, "{},{},{}", k, c.re, c.im)?;
        }
        Ok(())
    }
}

impl PhysicalField {
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Quadrature of `|phi|^2` on the grid.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.l
            / self.values.len() as f64
    }

    /// Project back onto the modes `|k| <= k_max`.
    pub fn inverse_transform(&self, k_max: usize) -> Result<SpectralField> {
        let m = self.values.len();
        if m < 2 * k_max + 2 {
            return Err(CoreError::GridTooSmall {
                m,
                required: 2 * k_max + 2,
            });
        }
        let mut buf = self.values.clone();
        dft_forward(&mut buf);
        let scale = self.l.sqrt() / m as f64;
        let mut out = SpectralField::zeros(k_max, self.l);
        for k in -(k_max as i64)..=(k_max as i64) {
            let bin = (k.rem_euclid(m as i64)) as usize;
            out.set_mode(k, buf[bin] * scale);
        }
        Ok(out)
    }
}

/// Dealiasing requirement for `|phi|^p`: padding factor `ceil(p/2)` over the
/// mode count.
pub fn dealias_requirement(k_max: usize, p: f64) -> usize {
    let pad = (p / 2.0).ceil().max(1.0) as usize;
    pad * (2 * k_max + 1)
}

/// Default power-of-two grid for pointwise powers of order `p`.
pub fn dealias_grid(k_max: usize, p: f64) -> usize {
    (dealias_requirement(k_max, p) + 1).next_power_of_two()
}
