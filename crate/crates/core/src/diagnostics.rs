//! Denoising quality measures: error ratios against a competing estimate
//! when the true signal is known, and signal-to-noise, roughness and
//! w-correlation when it is not.

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// `sqrt(sum (f - a)^2) / sqrt(sum (f - b)^2)`. Below 1 means `est_a` is the
/// better estimate of `truth`.
pub fn rrmse(truth: &[f64], est_a: &[f64], est_b: &[f64]) -> Result<f64> {
    same_len(truth, est_a)?;
    same_len(truth, est_b)?;
    let sq = |est: &[f64]| truth.iter().zip(est).map(|(f, e)| (f - e) * (f - e)).sum::<f64>();
    let den = sq(est_b);
    if den == 0.0 {
        return Err(Error::ZeroDenominator("rrmse"));
    }
    Ok(libm::sqrt(sq(est_a)) / libm::sqrt(den))
}

/// `sum |f - a| / sum |f - b|`.
pub fn rmae(truth: &[f64], est_a: &[f64], est_b: &[f64]) -> Result<f64> {
    same_len(truth, est_a)?;
    same_len(truth, est_b)?;
    let abs = |est: &[f64]| truth.iter().zip(est).map(|(f, e)| libm::fabs(f - e)).sum::<f64>();
    let den = abs(est_b);
    if den == 0.0 {
        return Err(Error::ZeroDenominator("rmae"));
    }
    Ok(abs(est_a) / den)
}

/// Root mean squared error between two equally long sequences.
pub fn rmse(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    same_len(truth, estimate)?;
    if truth.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    let ss: f64 = truth.iter().zip(estimate).map(|(f, e)| (f - e) * (f - e)).sum();
    Ok(libm::sqrt(ss / truth.len() as f64))
}

/// Sample variance with denominator `n - 1` (two-pass).
pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Empirical signal-to-noise ratio `sum fhat^2 / Var(y - fhat)`, with the
/// residual variance taken over `N - 1`.
pub fn snr(observed: &[f64], denoised: &[f64]) -> Result<f64> {
    same_len(observed, denoised)?;
    if observed.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: observed.len(),
        });
    }
    let residual: Vec<f64> = observed.iter().zip(denoised).map(|(y, f)| y - f).collect();
    let var = sample_variance(&residual);
    // Constant residuals can leave a rounding-level variance behind.
    let scale = residual.iter().fold(0.0f64, |m, r| m.max(libm::fabs(*r)));
    if var <= f64::EPSILON * f64::EPSILON * scale * scale * residual.len() as f64 || var == 0.0 {
        return Err(Error::ZeroResidualVariance);
    }
    Ok(denoised.iter().map(|f| f * f).sum::<f64>() / var)
}

/// Discrete roughness `sum_{n>=3} (f_n - 2 f_{n-1} + f_{n-2})^2`.
pub fn roughness(f: &[f64]) -> Result<f64> {
    if f.len() < 3 {
        return Err(Error::TooShort { need: 3, got: f.len() });
    }
    Ok(f.windows(3)
        .map(|w| {
            let d2 = w[2] - 2.0 * w[1] + w[0];
            d2 * d2
        })
        .sum())
}

/// Roughness at or below this is treated as zero (an affine fit).
pub const ROUGHNESS_EPSILON: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoisingScore {
    pub snr: f64,
    pub roughness: f64,
    /// `10 log10(snr + 1 / roughness)`; `+inf` when `affine` is set.
    pub goodness_db: f64,
    /// Set when the denoised series has zero roughness.
    pub affine: bool,
}

impl DenoisingScore {
    pub fn new(snr: f64, roughness: f64) -> Self {
        if roughness <= ROUGHNESS_EPSILON {
            Self {
                snr,
                roughness,
                goodness_db: f64::INFINITY,
                affine: true,
            }
        } else {
            Self {
                snr,
                roughness,
                goodness_db: 10.0 * libm::log10(snr + 1.0 / roughness),
                affine: false,
            }
        }
    }
}

/// Penalised SNR on the decibel scale; larger is better.
pub fn goodness_of_denoising(observed: &[f64], denoised: &[f64]) -> Result<DenoisingScore> {
    let s = snr(observed, denoised)?;
    let r = roughness(denoised)?;
    Ok(DenoisingScore::new(s, r))
}

/// `w_k = min(k, L, N - k + 1)` for 1-based `k`; for `L <= K` this is how
/// often position `k` occurs in the `L`-trajectory matrix.
pub fn w_weights(n: usize, window: usize) -> Vec<f64> {
    (1..=n).map(|k| k.min(window).min(n - k + 1) as f64).collect()
}

/// Weighted correlation of two series under the trajectory-matrix weights.
pub fn w_correlation(x: &[f64], y: &[f64], window: usize) -> Result<f64> {
    same_len(x, y)?;
    let n = x.len();
    if window < 2 || window + 1 > n {
        return Err(Error::WindowOutOfRange {
            window,
            min: 2,
            max: n.saturating_sub(1),
            len: n,
        });
    }
    let w = w_weights(n, window);
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for ((wk, a), b) in w.iter().zip(x).zip(y) {
        xy += wk * (a * b);
        xx += wk * a * a;
        yy += wk * b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        return Err(Error::ZeroWNorm);
    }
    // |rho| <= 1 by Cauchy-Schwarz; rounding may overshoot by an ulp.
    Ok((xy / (libm::sqrt(xx) * libm::sqrt(yy))).clamp(-1.0, 1.0))
}
