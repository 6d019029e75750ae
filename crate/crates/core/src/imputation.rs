//! Iterative SSA gap filling: missing entries start at zero and are
//! repeatedly overwritten by the SSA reconstruction while observed entries
//! stay fixed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::ssa::{check_window, ssa_denoise_with, RankRule};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;
/// The zero-filled gaps are not white noise, so the noise-floor rule tends to
/// keep them; an energy share does not.
pub const DEFAULT_RANK: RankRule = RankRule::CumulativeShare(0.90);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImputeOptions {
    pub window: usize,
    pub rank: RankRule,
    /// Stop once the largest change on a missing position is at most this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl ImputeOptions {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            rank: DEFAULT_RANK,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_rank(mut self, rank: RankRule) -> Self {
        self.rank = rank;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imputation {
    /// Completed series; no position is marked missing.
    pub series: TimeSeries,
    pub iterations: usize,
    /// `false` means `max_iter` ran out and `series` is the last iterate.
    pub converged: bool,
    /// Largest change on a missing position in the final iteration.
    pub last_change: f64,
}

pub fn impute(series: &TimeSeries, opts: &ImputeOptions) -> Result<Imputation> {
    let n = series.len();
    let gaps: Vec<usize> = (0..n).filter(|&i| series.is_missing(i)).collect();
    if gaps.is_empty() {
        return Err(Error::NothingToImpute);
    }
    if gaps.len() == n {
        return Err(Error::AllMissing);
    }
    check_window(opts.window, n)?;
    let observed = n - gaps.len();
    if observed < opts.window {
        return Err(Error::InsufficientObservations {
            observed,
            window: opts.window,
        });
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: "must be positive",
        });
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            reason: "must be at least 1",
        });
    }

    // Masked storage is already zero.
    let mut current = TimeSeries::new(series.name(), series.values().to_vec())?;
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let (recon, _) = ssa_denoise_with(&current, opts.window, opts.rank)?;
        let mut values = current.values().to_vec();
        last_change = 0.0;
        for &i in &gaps {
            last_change = last_change.max(libm::fabs(recon.values()[i] - values[i]));
            values[i] = recon.values()[i];
        }
        current = TimeSeries::new(series.name(), values)?;
        if last_change <= opts.tolerance {
            converged = true;
            break;
        }
    }
    Ok(Imputation {
        series: current,
        iterations,
        converged,
        last_change,
    })
}
