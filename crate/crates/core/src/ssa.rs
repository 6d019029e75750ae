//! Basic singular spectrum analysis: embedding, decomposition, grouping and
//! diagonal averaging, plus rank-based denoising of a single series.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Matrix};
use crate::series::TimeSeries;

/// Columns `first..=last` of a trajectory matrix generated by series `name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpan {
    pub name: String,
    pub first: usize,
    pub last: usize,
}

impl ColumnSpan {
    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An `L x K` (stacked) Hankel matrix with the spans of the series it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    entries: Matrix,
    window_length: usize,
    column_spans: Vec<ColumnSpan>,
}

impl TrajectoryMatrix {
    pub(crate) fn from_blocks(window_length: usize, blocks: &[(&str, &[f64])]) -> Self {
        let total: usize = blocks.iter().map(|(_, v)| v.len() + 1 - window_length).sum();
        let mut entries = Matrix::zeros(window_length, total);
        let mut spans = Vec::with_capacity(blocks.len());
        let mut offset = 0;
        for &(name, values) in blocks {
            let k = values.len() + 1 - window_length;
            for i in 0..window_length {
                entries.row_mut(i)[offset..offset + k].copy_from_slice(&values[i..i + k]);
            }
            spans.push(ColumnSpan {
                name: name.into(),
                first: offset,
                last: offset + k - 1,
            });
            offset += k;
        }
        Self {
            entries,
            window_length,
            column_spans: spans,
        }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn column_count(&self) -> usize {
        self.entries.cols()
    }

    pub fn column_spans(&self) -> &[ColumnSpan] {
        &self.column_spans
    }
}

/// Default window length: half the series length, rounded down.
pub fn default_window(n: usize) -> usize {
    n / 2
}

pub(crate) fn check_window(window: usize, n: usize) -> Result<()> {
    let max = n / 2;
    if window < 2 || window > max {
        return Err(Error::WindowOutOfRange {
            window,
            min: 2,
            max,
            len: n,
        });
    }
    Ok(())
}

/// Builds the trajectory matrix whose `j`-th column is `(y_j, ..., y_{j+L-1})`.
///
/// Trailing missing markers are dropped first; any other missing value is an
/// error.
pub fn embed(series: &TimeSeries, window: usize) -> Result<TrajectoryMatrix> {
    let values = series.complete_prefix()?;
    check_window(window, values.len())?;
    Ok(TrajectoryMatrix::from_blocks(window, &[(series.name(), values)]))
}

/// One singular triple `(sigma, U, V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigentriple {
    pub singular_value: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Eigentriple {
    /// Eigenvalue of `X X^T` belonging to this triple.
    pub fn eigenvalue(&self) -> f64 {
        self.singular_value * self.singular_value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsaDecomposition {
    triples: Vec<Eigentriple>,
    spectrum: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SsaDecomposition {
    /// The `d` triples above the rank tolerance.
    pub fn triples(&self) -> &[Eigentriple] {
        &self.triples
    }

    pub fn rank(&self) -> usize {
        self.triples.len()
    }

    /// All `min(L, K)` singular values, including numerically zero ones.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// Relative cutoff below which a singular value counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// SVD of the trajectory matrix. Triples with
/// `sigma_i <= sigma_1 * 1e-12 * max(L, K)` are dropped, and each left vector
/// is signed so that its first nonzero coordinate is positive.
pub fn decompose(x: &TrajectoryMatrix) -> Result<SsaDecomposition> {
    let m = x.entries();
    let svd = thin_svd(m)?;
    let (rows, cols) = (m.rows(), m.cols());
    let cutoff = svd.values.first().copied().unwrap_or(0.0) * RANK_TOLERANCE * rows.max(cols) as f64;
    let mut triples = Vec::new();
    for ((&s, mut u), mut v) in svd.values.iter().zip(svd.left).zip(svd.right) {
        if s <= cutoff || s == 0.0 {
            break;
        }
        if let Some(&lead) = u.iter().find(|c| libm::fabs(**c) > 1e-12) {
            if lead < 0.0 {
                u.iter_mut().for_each(|c| *c = -*c);
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        triples.push(Eigentriple {
            singular_value: s,
            left: u,
            right: v,
        });
    }
    Ok(SsaDecomposition {
        triples,
        spectrum: svd.values,
        rows,
        cols,
    })
}

/// Disjoint groups of 1-based component indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    groups: Vec<Vec<usize>>,
}

impl Grouping {
    pub fn new(groups: Vec<Vec<usize>>, rank: usize) -> Result<Self> {
        let mut seen = vec![false; rank + 1];
        for group in &groups {
            if group.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "grouping",
                    reason: "groups must be non-empty",
                });
            }
            for &i in group {
                if i == 0 || i > rank {
                    return Err(Error::ComponentIndex { index: i, rank });
                }
                if seen[i] {
                    return Err(Error::OverlappingGroups(i));
                }
                seen[i] = true;
            }
        }
        Ok(Self { groups })
    }

    /// The single group `{1..r}` used for denoising.
    pub fn leading(r: usize) -> Self {
        Self {
            groups: vec![(1..=r).collect()],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// One reconstructed matrix per group.
    pub fn reconstruct(&self, dec: &SsaDecomposition) -> Result<Vec<Matrix>> {
        self.groups.iter().map(|g| reconstruct_group(dec, g)).collect()
    }
}

/// `X_I = sum_{i in I} sigma_i U_i V_i^T` for 1-based indices `I`.
pub fn reconstruct_group(dec: &SsaDecomposition, indices: &[usize]) -> Result<Matrix> {
    let d = dec.rank();
    let mut out = Matrix::zeros(dec.rows, dec.cols);
    for &i in indices {
        if i == 0 || i > d {
            return Err(Error::ComponentIndex { index: i, rank: d });
        }
        let t = &dec.triples[i - 1];
        out.add_outer(t.singular_value, &t.left, &t.right);
    }
    Ok(out)
}

/// Diagonal averaging: element `n` of the result is the mean of `M(i, j)`
/// over the anti-diagonal `i + j = n` (0-based).
pub fn hankelize(m: &Matrix) -> Vec<f64> {
    let (l, k) = (m.rows(), m.cols());
    if l == 0 || k == 0 {
        return Vec::new();
    }
    let n = l + k - 1;
    let mut out = vec![0.0; n];
    for i in 0..l {
        for (acc, &x) in out[i..i + k].iter_mut().zip(m.row(i)) {
            *acc += x;
        }
    }
    let short = l.min(k);
    for (idx, v) in out.iter_mut().enumerate() {
        let count = (idx + 1).min(short).min(n - idx);
        *v /= count as f64;
    }
    out
}

/// How many leading components form the signal group.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankRule {
    /// Exactly `r` components; `r` must not exceed the numerical rank.
    Fixed(usize),
    /// Every component above the rank tolerance.
    Full,
    /// Smallest `r` whose eigenvalue share `sum_{i<=r} lambda_i / sum lambda_i`
    /// reaches the given fraction.
    CumulativeShare(f64),
    /// Optimal hard threshold for a low-rank matrix in white noise of unknown
    /// level: keep `sigma_i > omega(beta) * median(sigma)`, where
    /// `beta = min(L,K) / max(L,K)` and
    /// `omega(beta) = 0.56 beta^3 - 0.95 beta^2 + 1.82 beta + 1.43`.
    #[default]
    NoiseFloor,
}

impl RankRule {
    pub fn select(&self, dec: &SsaDecomposition) -> Result<usize> {
        let d = dec.rank();
        if d == 0 {
            return Err(Error::Degenerate("trajectory matrix is zero"));
        }
        match *self {
            RankRule::Fixed(r) => {
                if r == 0 || r > d {
                    Err(Error::RankOutOfRange { rank: r, max: d })
                } else {
                    Ok(r)
                }
            }
            RankRule::Full => Ok(d),
            RankRule::CumulativeShare(share) => {
                if !(share > 0.0 && share <= 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "share",
                        reason: "must lie in (0, 1]",
                    });
                }
                let total: f64 = dec.spectrum.iter().map(|s| s * s).sum();
                let mut acc = 0.0;
                for (i, t) in dec.triples.iter().enumerate() {
                    acc += t.eigenvalue();
                    if acc >= share * total {
                        return Ok(i + 1);
                    }
                }
                Ok(d)
            }
            RankRule::NoiseFloor => {
                let (rows, cols) = dec.shape();
                let beta = rows.min(cols) as f64 / rows.max(cols) as f64;
                let omega = 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;
                let threshold = omega * median(&dec.spectrum);
                let r = dec.triples.iter().filter(|t| t.singular_value > threshold).count();
                Ok(r.clamp(1, d))
            }
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Rank-`r` SSA reconstruction of `series`; the output has the input's length.
pub fn ssa_denoise(series: &TimeSeries, window: usize, rank: usize) -> Result<TimeSeries> {
    ssa_denoise_with(series, window, RankRule::Fixed(rank)).map(|(s, _)| s)
}

/// As [`ssa_denoise`] with the rank chosen by `rule`; also returns that rank.
pub fn ssa_denoise_with(series: &TimeSeries, window: usize, rule: RankRule) -> Result<(TimeSeries, usize)> {
    let x = embed(series, window)?;
    let dec = decompose(&x)?;
    let r = rule.select(&dec)?;
    let recon = hankelize(&reconstruct_group(&dec, &Grouping::leading(r).groups[0])?);
    Ok((series.with_prefix(recon)?, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new("x", v.to_vec()).unwrap()
    }

    #[test]
    fn embed_builds_lagged_columns() {
        let x = embed(&ts(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(x.entries().row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(x.entries().row(1), &[2.0, 3.0, 4.0]);
        assert_eq!(x.column_spans()[0].len(), 3);
    }

    #[test]
    fn window_bounds_are_enforced() {
        // floor(3/2) = 1 < 2: a length-3 series has no valid window
        assert!(matches!(embed(&ts(&[1.0, 2.0, 3.0]), 2), Err(Error::WindowOutOfRange { .. })));
        assert_eq!(embed(&ts(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap().entries().cols(), 3);
        assert!(matches!(embed(&ts(&[1.0, 2.0, 3.0, 4.0]), 3), Err(Error::WindowOutOfRange { .. })));
        assert!(matches!(embed(&ts(&[1.0, 2.0, 3.0, 4.0]), 1), Err(Error::WindowOutOfRange { .. })));
    }

    #[test]
    fn embed_rejects_interior_missing() {
        let s = TimeSeries::from_options("m", &[Some(1.0), None, Some(2.0), Some(3.0)]).unwrap();
        assert!(matches!(embed(&s, 2), Err(Error::MissingValues(_))));
    }

    #[test]
    fn constant_series_embeds_to_constant_matrix() {
        let x = embed(&ts(&[2.5; 9]), 4).unwrap();
        assert!(x.entries().as_slice().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn hankelize_two_by_two() {
        let m = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(hankelize(&m), vec![1.0, 2.5, 4.0]);
    }

    #[test]
    fn grouping_validates_indices() {
        assert!(Grouping::new(vec![vec![1, 2], vec![3]], 3).is_ok());
        assert_eq!(Grouping::new(vec![vec![1, 2], vec![2]], 3), Err(Error::OverlappingGroups(2)));
        assert_eq!(
            Grouping::new(vec![vec![4]], 3),
            Err(Error::ComponentIndex { index: 4, rank: 3 })
        );
    }

    #[test]
    fn empty_group_reconstructs_zero() {
        let dec = decompose(&embed(&ts(&[1.0, 3.0, 2.0, 5.0, 4.0, 6.0]), 3).unwrap()).unwrap();
        let z = reconstruct_group(&dec, &[]).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));
        assert!(matches!(reconstruct_group(&dec, &[0]), Err(Error::ComponentIndex { .. })));
    }

    #[test]
    fn rank_above_numerical_rank_is_rejected() {
        let s = ts(&[1.0; 10]);
        assert_eq!(
            ssa_denoise(&s, 5, 2),
            Err(Error::RankOutOfRange { rank: 2, max: 1 })
        );
        let dec = decompose(&embed(&ts(&[1.0, 0.0, 2.0, 0.0, 1.0, 3.0]), 3).unwrap()).unwrap();
        assert_eq!(RankRule::Full.select(&dec), Ok(dec.rank()));
    }

    #[test]
    fn sign_convention_makes_leading_coordinate_positive() {
        let s = ts(&[-1.0, -2.0, -3.0, -1.0, -5.0, -2.0, -1.5, -2.2]);
        let dec = decompose(&embed(&s, 4).unwrap()).unwrap();
        for t in dec.triples() {
            let lead = t.left.iter().find(|c| c.abs() > 1e-12).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn cumulative_share_rule() {
        let s = ts(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let dec = decompose(&embed(&s, 4).unwrap()).unwrap();
        // mean level and alternation carry equal energy here
        assert_eq!(RankRule::CumulativeShare(0.4).select(&dec).unwrap(), 1);
        assert_eq!(RankRule::CumulativeShare(1.0).select(&dec).unwrap(), dec.rank());
        assert!(RankRule::CumulativeShare(0.0).select(&dec).is_err());
    }

    #[test]
    fn noise_floor_recovers_sinusoid_rank_without_noise() {
        let v: Vec<f64> = (1..=60).map(|t| libm::sin(2.0 * core::f64::consts::PI * t as f64 / 12.0)).collect();
        let dec = decompose(&embed(&ts(&v), 30).unwrap()).unwrap();
        assert_eq!(dec.rank(), 2);
        assert_eq!(RankRule::NoiseFloor.select(&dec).unwrap(), 2);
    }

    #[test]
    fn denoise_pads_trailing_missing() {
        let mut v: Vec<Option<f64>> = (0..10).map(|t| Some(t as f64)).collect();
        v.push(None);
        let s = TimeSeries::from_options("x", &v).unwrap();
        let out = ssa_denoise(&s, 5, 2).unwrap();
        assert_eq!(out.len(), 11);
        assert!(out.is_missing(10));
        for t in 0..10 {
            assert!((out.values()[t] - t as f64).abs() < 1e-9);
        }
    }
}
