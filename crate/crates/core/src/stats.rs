//! Small statistics toolbox shared by the samplers, estimators and tests:
//! batch means for correlated chains, jackknife and bootstrap resampling,
//! stable log-mean-exp, least-squares fits and the two-sample
//! Kolmogorov-Smirnov test.

use rand::Rng;

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean assuming independent samples.
pub fn stderr_iid(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of the mean for a correlated series, by block averaging.
///
/// The series is cut into `n_blocks` contiguous blocks; the spread of block
/// means absorbs the autocorrelation as long as blocks are longer than the
/// correlation time.
pub fn stderr_batch(xs: &[f64], n_blocks: usize) -> f64 {
    let nb = n_blocks.clamp(2, xs.len().max(2));
    let block = xs.len() / nb;
    if block == 0 {
        return stderr_iid(xs);
    }
    let means: Vec<f64> = (0..nb).map(|b| mean(&xs[b * block..(b + 1) * block])).collect();
    stderr_iid(&means)
}

/// log(mean(exp(w))) computed without overflow.
pub fn log_mean_exp(ws: &[f64]) -> f64 {
    let max = ws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = ws.iter().map(|w| (w - max).exp()).sum();
    max + (s / ws.len() as f64).ln()
}

/// Effective sample size of an importance-sampling weight set given as logs:
/// `(sum w)^2 / sum w^2`.
pub fn ess_from_log_weights(ws: &[f64]) -> f64 {
    let max = ws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return 0.0;
    }
    let s1: f64 = ws.iter().map(|w| (w - max).exp()).sum();
    let s2: f64 = ws.iter().map(|w| (2.0 * (w - max)).exp()).sum();
    s1 * s1 / s2
}

/// A point estimate with a resampling standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Delete-one-block jackknife of an arbitrary statistic.
///
/// `stat(None)` must return the full-data estimate and `stat(Some(b))` the
/// estimate with block `b` removed; blocks are the caller's partition of the
/// data into `n_blocks` pieces.
pub fn jackknife<F: Fn(Option<usize>) -> f64>(n_blocks: usize, stat: F) -> Estimate {
    assert!(n_blocks >= 2, "jackknife needs at least 2 blocks");
    let full = stat(None);
    let leave_outs: Vec<f64> = (0..n_blocks).map(|b| stat(Some(b))).collect();
    let m = mean(&leave_outs);
    let var: f64 = leave_outs.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        * (n_blocks as f64 - 1.0)
        / n_blocks as f64;
    Estimate {
        value: full,
        std_err: var.sqrt(),
    }
}

/// Jackknife of log(mean(exp(w))) over `n_blocks` contiguous blocks.
pub fn log_mean_exp_jackknife(ws: &[f64], n_blocks: usize) -> Estimate {
    let n = ws.len();
    let nb = n_blocks.min(n).max(2);
    let bounds: Vec<usize> = (0..=nb).map(|b| b * n / nb).collect();
    jackknife(nb, |skip| match skip {
        None => log_mean_exp(ws),
        Some(b) => {
            let mut kept = Vec::with_capacity(n - (bounds[b + 1] - bounds[b]));
            kept.extend_from_slice(&ws[..bounds[b]]);
            kept.extend_from_slice(&ws[bounds[b + 1]..]);
            log_mean_exp(&kept)
        }
    })
}

/// Percentile bootstrap interval of a statistic over resampled item indices.
///
/// `stat` receives a multiset of item indices and may return `None` when the
/// statistic is undefined on that resample (e.g. a failed fit); such resamples
/// are skipped.
pub fn bootstrap_ci<R: Rng, F: Fn(&[usize]) -> Option<f64>>(
    rng: &mut R,
    n_items: usize,
    n_boot: usize,
    level: f64,
    stat: F,
) -> Option<(f64, f64)> {
    let mut vals = Vec::with_capacity(n_boot);
    let mut idx = vec![0usize; n_items];
    for _ in 0..n_boot {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n_items);
        }
        if let Some(v) = stat(&idx) {
            vals.push(v);
        }
    }
    if vals.len() < n_boot / 2 {
        return None;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tail = (1.0 - level) / 2.0;
    let lo = ((vals.len() as f64 - 1.0) * tail).round() as usize;
    let hi = ((vals.len() as f64 - 1.0) * (1.0 - tail)).round() as usize;
    Some((vals[lo], vals[hi]))
}

/// Ordinary least squares line fit; returns (slope, intercept, r_squared).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let e = yi - (slope * xi + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - my) * (yi - my)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN };
    let _ = n;
    (slope, intercept, r2)
}

/// Two-sample Kolmogorov-Smirnov test: returns the statistic `D` and the
/// asymptotic p-value for the hypothesis that both samples share one law.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = xs[i].min(ys[j]);
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, ks_survival(lambda))
}

/// Kolmogorov distribution survival function
/// `Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)`.
fn ks_survival(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
