//! Preconditioned Crank-Nicolson sampling of measures absolutely continuous
//! with respect to the Gaussian reference.
//!
//! The proposal `phi' = sqrt(1 - rho^2) phi + rho xi`, with `xi` a fresh
//! reference draw, preserves the reference measure exactly, so the Metropolis
//! correction only ever sees the non-Gaussian log-weight. Acceptance stays
//! well behaved as the truncation order grows.

use rand::Rng;

use super::fejer::FejerSpec;
use super::mode_law::ModeLaw;
use crate::field::SpectralField;
use crate::params::ModelParams;
use crate::{CoreError, Result};

/// Knobs of a pCN chain.
#[derive(Debug, Clone)]
pub struct ChainCfg {
    /// Proposal boldness in (0, 1].
    pub rho: f64,
    /// Steps discarded before retaining samples; also the adaptation phase.
    pub burn_in: usize,
    /// Keep one state every `thin` steps.
    pub thin: usize,
    /// Adapt `rho` toward `target_acceptance` during burn-in.
    pub adapt: bool,
    pub target_acceptance: f64,
    /// Abort when this many consecutive proposals are rejected.
    pub stuck_window: usize,
}

impl Default for ChainCfg {
    fn default() -> Self {
        Self {
            rho: 0.25,
            burn_in: 2_000,
            thin: 20,
            adapt: true,
            target_acceptance: 0.25,
            stuck_window: 10_000,
        }
    }
}

/// Bookkeeping of a running chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: SpectralField,
    pub log_weight: f64,
    pub accepted: u64,
    pub proposed: u64,
    pub rng_stream: u64,
}

/// A pCN chain against an arbitrary log-weight relative to the reference.
pub struct PcnChain<F: FnMut(&SpectralField) -> Result<f64>> {
    law: ModeLaw,
    log_weight: F,
    pub state: ChainState,
    rho: f64,
    cfg: ChainCfg,
    rejects_in_a_row: usize,
    accepted_in_window: usize,
    window: usize,
    /// (current, proposed) log-weights of every proposal, for the detailed
    /// balance diagnostics; capped.
    pub proposal_log: Vec<(f64, f64)>,
    pub log_proposals: bool,
}

impl<F: FnMut(&SpectralField) -> Result<f64>> PcnChain<F> {
    pub fn new(
        law: ModeLaw,
        init: SpectralField,
        mut log_weight: F,
        cfg: ChainCfg,
        rng_stream: u64,
    ) -> Result<Self> {
        let w0 = log_weight(&init)?;
        if !w0.is_finite() {
            return Err(CoreError::DegenerateState(
                "initial state has non-finite log-weight".into(),
            ));
        }
        Ok(Self {
            law,
            log_weight,
            state: ChainState {
                current: init,
                log_weight: w0,
                accepted: 0,
                proposed: 0,
                rng_stream,
            },
            rho: cfg.rho,
            cfg,
            rejects_in_a_row: 0,
            accepted_in_window: 0,
            window: 0,
            proposal_log: Vec::new(),
            log_proposals: false,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.state.proposed == 0 {
            return 0.0;
        }
        self.state.accepted as f64 / self.state.proposed as f64
    }

    /// One proposal; returns whether it was accepted.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Result<bool> {
        let fresh = self.law.sample(rng);
        let keep = (1.0 - self.rho * self.rho).sqrt();
        let proposal = self.state.current.scale(keep).add_scaled(&fresh, self.rho);
        let w_new = (self.log_weight)(&proposal)?;
        if self.log_proposals && self.proposal_log.len() < 100_000 {
            self.proposal_log.push((self.state.log_weight, w_new));
        }
        self.state.proposed += 1;
        let accept = {
            let delta = w_new - self.state.log_weight;
            delta >= 0.0 || rng.random::<f64>().ln() < delta
        };
        if accept {
            self.state.current = proposal;
            self.state.log_weight = w_new;
            self.state.accepted += 1;
            self.rejects_in_a_row = 0;
            self.accepted_in_window += 1;
        } else {
            self.rejects_in_a_row += 1;
            if self.rejects_in_a_row >= self.cfg.stuck_window {
                return Err(CoreError::StuckChain {
                    window: self.cfg.stuck_window,
                    accepted: self.state.accepted,
                    proposed: self.state.proposed,
                    log_weight: self.state.log_weight,
                });
            }
        }
        self.window += 1;
        Ok(accept)
    }

    fn adapt_window(&mut self) {
        if self.window >= 100 {
            let rate = self.accepted_in_window as f64 / self.window as f64;
            self.rho = (self.rho * (0.7 * (rate - self.cfg.target_acceptance)).exp())
                .clamp(1e-4, 0.9999);
            self.window = 0;
            self.accepted_in_window = 0;
        }
    }

    /// Burn in (adapting `rho` if configured), then collect `n` states thinned
    /// by the configured stride.
    pub fn run<R: Rng>(&mut self, rng: &mut R, n_samples: usize) -> Result<ChainRun> {
        for _ in 0..self.cfg.burn_in {
            self.step(rng)?;
            if self.cfg.adapt {
                self.adapt_window();
            }
        }
        // Freeze rho after burn-in so the retained chain is a fixed kernel.
        let mut samples = Vec::with_capacity(n_samples);
        while samples.len() < n_samples {
            for _ in 0..self.cfg.thin.max(1) {
                self.step(rng)?;
            }
            samples.push(self.state.current.clone());
        }
        Ok(ChainRun {
            samples,
            acceptance_rate: self.acceptance_rate(),
            rho: self.rho,
        })
    }
}

/// Output of a chain run.
pub struct ChainRun {
    pub samples: Vec<SpectralField>,
    pub acceptance_rate: f64,
    pub rho: f64,
}

/// Log-weight of the generalized grand-canonical tilt relative to the
/// reference measure: `beta (lambda/p) ||phi||_p^p - beta kappa_eff N^r`.
pub fn ggc_log_weight(field: &SpectralField, params: &ModelParams) -> Result<f64> {
    let mut w = 0.0;
    if params.lambda != 0.0 {
        w += params.beta * params.lambda / params.p * field.lp_norm_p(params.p)?;
    }
    if params.kappa_eff() != 0.0 {
        w -= params.beta * params.kappa_eff() * field.l2_norm_sq().powf(params.r);
    }
    Ok(w)
}

/// pCN chain targeting the generalized grand-canonical measure; returns `n`
/// thinned equilibrium draws.
pub fn sample_ggc<R: Rng>(
    rng: &mut R,
    params: &ModelParams,
    cfg: &ChainCfg,
    n_samples: usize,
) -> Result<ChainRun> {
    params.validate_gibbs()?;
    let law = ModeLaw::from_params(params);
    let init = law.sample(rng);
    let p = params.clone();
    let mut chain = PcnChain::new(law, init, move |f| ggc_log_weight(f, &p), cfg.clone(), 0)?;
    chain.run(rng, n_samples)
}

/// pCN chain targeting the Fejér-conditioned canonical measure
/// (reference weighted by `K_ell(n - N(phi))`); returns `n` thinned draws.
pub fn sample_conditioned<R: Rng>(
    rng: &mut R,
    fejer: &FejerSpec,
    params: &ModelParams,
    cfg: &ChainCfg,
    n_samples: usize,
) -> Result<ChainRun> {
    params.validate()?;
    let law = ModeLaw::from_params(params);
    // Start exactly on the sphere: rescale a free draw to N = n, which is
    // always inside the kernel support.
    let free = law.sample(rng);
    let n0 = free.l2_norm_sq();
    if n0 <= 0.0 {
        return Err(CoreError::DegenerateState("zero free draw".into()));
    }
    let init = free.scale((fejer.n / n0).sqrt());
    let spec = *fejer;
    let mut chain = PcnChain::new(
        law,
        init,
        move |f| Ok(spec.log_weight(f.l2_norm_sq())),
        cfg.clone(),
        0,
    )?;
    chain.run(rng, n_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreams;
    use crate::stats;
    use std::f64::consts::TAU;

    #[test]
    fn trivial_weight_always_accepts() {
        let params = ModelParams::free(4);
        let mut rng = RngStreams::new(1).stream(1);
        let run = sample_ggc(&mut rng, &params, &ChainCfg::default(), 200).unwrap();
        assert_eq!(run.acceptance_rate, 1.0);
    }

    #[test]
    fn ggc_log_weight_trivial_cases() {
        let params = ModelParams::free(4);
        let mut rng = RngStreams::new(2).stream(1);
        let f = sample_free(&mut rng, &params);
        assert_eq!(ggc_log_weight(&f, &params).unwrap(), 0.0);
        let z = SpectralField::zeros(4, TAU);
        let tilted = ModelParams {
            lambda: 0.3,
            kappa: 1.0,
            ..ModelParams::free(4)
        };
        assert_eq!(ggc_log_weight(&z, &tilted).unwrap(), 0.0);
    }

    use super::super::mode_law::sample_free;

    #[test]
    fn log_weight_is_minus_beta_excess_energy() {
        // ggc_log_weight == -beta (effective_energy - gaussian_energy).
        let params = ModelParams {
            lambda: 0.4,
            kappa: 0.8,
            r: 3.0,
            beta: 1.7,
            ..ModelParams::free(6)
        };
        let mut rng = RngStreams::new(3).stream(1);
        for _ in 0..20 {
            let f = sample_free(&mut rng, &params);
            let w = ggc_log_weight(&f, &params).unwrap();
            let excess = f.effective_energy(&params).unwrap() - f.gaussian_energy(&params);
            assert!(
                (w + params.beta * excess).abs() < 1e-10 * (1.0 + w.abs()),
                "w = {w}, -beta excess = {}",
                -params.beta * excess
            );
        }
    }

    #[test]
    fn focusing_without_confinement_is_rejected() {
        let params = ModelParams {
            lambda: 0.5,
            kappa: 0.0,
            ..ModelParams::free(4)
        };
        let mut rng = RngStreams::new(4).stream(1);
        assert!(matches!(
            sample_ggc(&mut rng, &params, &ChainCfg::default(), 10),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn single_mode_tilted_mass_matches_quadrature() {
        // One retained mode, lambda = 0, kappa > 0, r = 1: N is Exp(theta/2)
        // tilted by e^{-beta kappa N}, i.e. Exp(theta/2 + beta kappa).
        let params = ModelParams {
            kappa: 0.7,
            r: 1.0 + 1e-9, // r = 1 tilt; validate() wants r > 1
            k_max: 0,
            ..ModelParams::free(0)
        };
        let theta = params.theta(0);
        let rate = theta / 2.0 + params.beta * params.kappa;
        let expect = 1.0 / rate;

        let mut rng = RngStreams::new(5).stream(1);
        let cfg = ChainCfg {
            burn_in: 3_000,
            thin: 10,
            ..ChainCfg::default()
        };
        let run = sample_ggc(&mut rng, &params, &cfg, 4_000).unwrap();
        let ns: Vec<f64> = run.samples.iter().map(|f| f.l2_norm_sq()).collect();
        let mean = stats::mean(&ns);
        let se = stats::stderr_batch(&ns, 40);
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "E N = {mean} +- {se}, expected {expect}"
        );
    }

    #[test]
    fn focusing_chain_is_seed_stable() {
        let params = ModelParams {
            lambda: 0.1,
            kappa: 1.0,
            r: 10.0,
            k_max: 32,
            ..ModelParams::free(32)
        };
        let cfg = ChainCfg {
            burn_in: 2_000,
            thin: 20,
            ..ChainCfg::default()
        };
        let collect = |seed: u64| -> (f64, f64) {
            let mut rng = RngStreams::new(seed).stream(1);
            let run = sample_ggc(&mut rng, &params, &cfg, 1_500).unwrap();
            let q: Vec<f64> = run
                .samples
                .iter()
                .map(|f| f.lp_norm_p(4.0).unwrap())
                .collect();
            (stats::mean(&q), stats::stderr_batch(&q, 30))
        };
        let (a, sa) = collect(100);
        let (b, sb) = collect(200);
        let combined = (sa * sa + sb * sb).sqrt();
        assert!(
            (a - b).abs() < 3.0 * combined,
            "quartic means {a} vs {b} differ beyond 3 x {combined}"
        );
    }

    #[test]
    fn detailed_balance_identity_on_logged_proposals() {
        // min(1, e^d) = e^d min(1, e^-d) for every logged proposal pair.
        let params = ModelParams {
            lambda: 0.1,
            kappa: 1.0,
            r: 10.0,
            k_max: 8,
            ..ModelParams::free(8)
        };
        let law = ModeLaw::from_params(&params);
        let mut rng = RngStreams::new(6).stream(1);
        let init = law.sample(&mut rng);
        let p = params.clone();
        let mut chain = PcnChain::new(
            law,
            init,
            move |f| ggc_log_weight(f, &p),
            ChainCfg::default(),
            0,
        )
        .unwrap();
        chain.log_proposals = true;
        for _ in 0..500 {
            chain.step(&mut rng).unwrap();
        }
        for &(w, w_new) in &chain.proposal_log {
            let d: f64 = w_new - w;
            let fwd = d.min(0.0).exp();
            let bwd = (-d).min(0.0).exp();
            assert!((fwd - d.exp() * bwd).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioned_chain_concentrates_as_order_grows() {
        // Use a cold enough reference that the kernel support covers the bulk
        // of the mass distribution.
        let params = ModelParams {
            beta: 4.0,
            ..ModelParams::free(8)
        };
        let law = ModeLaw::from_params(&params);
        let n_target = law.mean_n();
        let cfg = ChainCfg {
            burn_in: 4_000,
            thin: 10,
            ..ChainCfg::default()
        };
        let std_at = |ell: usize, seed: u64| -> (f64, f64) {
            let mut rng = RngStreams::new(seed).stream(1);
            let spec = FejerSpec::new(ell, n_target).unwrap();
            let run = sample_conditioned(&mut rng, &spec, &params, &cfg, 4_000).unwrap();
            let ns: Vec<f64> = run.samples.iter().map(|f| f.l2_norm_sq()).collect();
            (stats::mean(&ns), stats::variance(&ns).sqrt())
        };
        let (_m4, s4) = std_at(4, 21);
        let (_m16, s16) = std_at(16, 22);
        let (m64, s64) = std_at(64, 23);
        assert!(s16 < s4, "std dev should shrink: {s4} -> {s16}");
        assert!(s64 < s4, "std dev should shrink: {s4} -> {s64}");
        // At ell = 64 the mean mass sits within 2% of the target.
        assert!(
            (m64 - n_target).abs() / n_target < 0.02,
            "mean {m64} vs target {n_target}"
        );
    }

    #[test]
    fn order_one_conditioning_reproduces_the_reference() {
        // K_1 == 1 on its support; with a cold reference the support covers
        // the mass distribution, so the chain must reproduce free statistics.
        let params = ModelParams {
            beta: 4.0,
            ..ModelParams::free(8)
        };
        let law = ModeLaw::from_params(&params);
        let cfg = ChainCfg {
            burn_in: 2_000,
            thin: 30,
            ..ChainCfg::default()
        };
        let mut rng = RngStreams::new(31).stream(1);
        let spec = FejerSpec::new(1, law.mean_n()).unwrap();
        let run = sample_conditioned(&mut rng, &spec, &params, &cfg, 2_000).unwrap();
        let chain_ns: Vec<f64> = run.samples.iter().map(|f| f.l2_norm_sq()).collect();
        let free_ns: Vec<f64> = (0..2_000).map(|_| law.sample(&mut rng).l2_norm_sq()).collect();
        let (_, p) = stats::ks_two_sample(&chain_ns, &free_ns);
        assert!(p > 0.01, "KS p = {p}");
    }

    #[test]
    fn stuck_chain_raises_a_fault() {
        // A weight that rejects everything except the start.
        let params = ModelParams::free(2);
        let law = ModeLaw::from_params(&params);
        let mut rng = RngStreams::new(7).stream(1);
        let init = law.sample(&mut rng);
        let n0 = init.l2_norm_sq();
        let mut first = true;
        let mut chain = PcnChain::new(
            law,
            init,
            move |f| {
                if first && (f.l2_norm_sq() - n0).abs() < 1e-30 {
                    first = false;
                    Ok(0.0)
                } else {
                    Ok(f64::NEG_INFINITY)
                }
            },
            ChainCfg {
                stuck_window: 50,
                ..ChainCfg::default()
            },
            0,
        )
        .unwrap();
        let mut saw_fault = false;
        for _ in 0..200 {
            match chain.step(&mut rng) {
                Err(CoreError::StuckChain { window, .. }) => {
                    assert_eq!(window, 50);
                    saw_fault = true;
                    break;
                }
                Ok(_) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(saw_fault);
    }
}
