//! Multivariate SSA: per-series Hankel blocks concatenated column-wise into
//! one stacked trajectory matrix, decomposed jointly, reconstructed per block.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::{MultiSeries, TimeSeries};
use crate::ssa::{decompose, hankelize, reconstruct_group, Grouping, RankRule, TrajectoryMatrix};

/// Column layout of a stacked trajectory matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MssaPlan {
    window_length: usize,
    series_lengths: Vec<usize>,
    column_offsets: Vec<usize>,
}

impl MssaPlan {
    /// Requires `2 <= L < min(N_p)`.
    pub fn new(window_length: usize, series_lengths: Vec<usize>) -> Result<Self> {
        let shortest = series_lengths.iter().copied().min().ok_or(Error::NoSeries)?;
        if window_length < 2 || window_length >= shortest {
            return Err(Error::WindowOutOfRange {
                window: window_length,
                min: 2,
                max: shortest.saturating_sub(1),
                len: shortest,
            });
        }
        let mut offset = 0;
        let column_offsets = series_lengths
            .iter()
            .map(|&n| {
                let start = offset;
                offset += n - window_length + 1;
                start
            })
            .collect();
        Ok(Self {
            window_length,
            series_lengths,
            column_offsets,
        })
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn series_lengths(&self) -> &[usize] {
        &self.series_lengths
    }

    pub fn column_offsets(&self) -> &[usize] {
        &self.column_offsets
    }

    /// `K_p = N_p - L + 1`.
    pub fn block_columns(&self, p: usize) -> usize {
        self.series_lengths[p] - self.window_length + 1
    }

    /// `K = sum_p K_p`.
    pub fn total_columns(&self) -> usize {
        (0..self.series_lengths.len()).map(|p| self.block_columns(p)).sum()
    }
}

fn prefixes(ms: &MultiSeries) -> Result<Vec<&[f64]>> {
    ms.series().iter().map(TimeSeries::complete_prefix).collect()
}

/// Stacked trajectory matrix `[X^(1) | ... | X^(s)]` in series order.
pub fn embed_multi(ms: &MultiSeries, window: usize) -> Result<TrajectoryMatrix> {
    let values = prefixes(ms)?;
    MssaPlan::new(window, values.iter().map(|v| v.len()).collect())?;
    let blocks: Vec<(&str, &[f64])> = ms.series().iter().map(|s| s.name()).zip(values).collect();
    Ok(TrajectoryMatrix::from_blocks(window, &blocks))
}

/// Splits a stacked reconstruction at the trajectory matrix's column spans
/// and diagonal-averages each block on its own.
pub fn split_hankelize(m: &Matrix, x: &TrajectoryMatrix) -> Vec<Vec<f64>> {
    x.column_spans()
        .iter()
        .map(|span| hankelize(&m.columns(span.first, span.len())))
        .collect()
}

/// Joint rank-`r` MSSA reconstruction of every member series.
pub fn mssa_denoise(ms: &MultiSeries, window: usize, rank: usize) -> Result<MultiSeries> {
    mssa_denoise_with(ms, window, RankRule::Fixed(rank)).map(|(m, _)| m)
}

/// As [`mssa_denoise`] with the rank chosen by `rule` on the joint spectrum.
pub fn mssa_denoise_with(ms: &MultiSeries, window: usize, rule: RankRule) -> Result<(MultiSeries, usize)> {
    let x = embed_multi(ms, window)?;
    let dec = decompose(&x)?;
    let r = rule.select(&dec)?;
    let recon = reconstruct_group(&dec, &Grouping::leading(r).groups()[0])?;
    let series = ms
        .series()
        .iter()
        .zip(split_hankelize(&recon, &x))
        .map(|(s, v)| s.with_prefix(v))
        .collect::<Result<Vec<_>>>()?;
    Ok((MultiSeries::new(series)?, r))
}
