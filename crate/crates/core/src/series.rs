//! Univariate and multivariate series with explicit missing masks, plus the
//! grouped-sample carrier used by the group-comparison tests.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A named, ordered sequence of observations. Missing positions are tracked
/// by a mask; their stored value is always `0.0` and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    values: Vec<f64>,
    missing: Vec<bool>,
}

impl TimeSeries {
    /// A fully observed series.
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let missing = alloc::vec![false; values.len()];
        Self::from_parts(name, values, missing)
    }

    /// Builds a series from optional observations (`None` is missing).
    pub fn from_options(name: impl Into<String>, values: &[Option<f64>]) -> Result<Self> {
        let missing = values.iter().map(Option::is_none).collect();
        let values = values.iter().map(|v| v.unwrap_or(0.0)).collect();
        Self::from_parts(name, values, missing)
    }

    pub fn from_parts(name: impl Into<String>, mut values: Vec<f64>, missing: Vec<bool>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if missing.len() != values.len() {
            return Err(Error::MaskLength {
                values: values.len(),
                mask: missing.len(),
            });
        }
        for (index, (v, &m)) in values.iter_mut().zip(&missing).enumerate() {
            if m {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::NonFinite { index, value: *v });
            }
        }
        Ok(Self {
            name: name.into(),
            values,
            missing,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw storage. Missing positions hold `0.0`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        match self.missing.get(index) {
            Some(false) => Some(self.values[index]),
            _ => None,
        }
    }

    pub fn is_missing(&self, index: usize) -> bool {
        self.missing.get(index).copied().unwrap_or(false)
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    /// Number of positions up to and including the last observed one.
    pub fn effective_len(&self) -> usize {
        self.missing.iter().rposition(|&m| !m).map_or(0, |i| i + 1)
    }

    /// The observed prefix of the series (trailing missing markers stripped).
    /// Fails if a missing value occurs before the last observation.
    pub fn complete_prefix(&self) -> Result<&[f64]> {
        let n = self.effective_len();
        if n == 0 {
            return Err(Error::AllMissing);
        }
        if self.missing[..n].iter().any(|&m| m) {
            return Err(Error::MissingValues(self.name.clone()));
        }
        Ok(&self.values[..n])
    }

    /// A copy of `self` with the first `prefix.len()` values replaced and the
    /// remaining positions left missing.
    pub(crate) fn with_prefix(&self, prefix: Vec<f64>) -> Result<Self> {
        let n = self.len();
        let observed = prefix.len();
        let mut values = prefix;
        values.resize(n, 0.0);
        let missing = (0..n).map(|i| i >= observed).collect();
        Self::from_parts(self.name.clone(), values, missing)
    }
}

/// An ordered collection of uniquely named series, possibly of different
/// lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    series: Vec<TimeSeries>,
}

impl MultiSeries {
    pub fn new(series: Vec<TimeSeries>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::NoSeries);
        }
        for (i, s) in series.iter().enumerate() {
            if series[..i].iter().any(|t| t.name() == s.name()) {
                return Err(Error::DuplicateName(s.name.clone()));
            }
        }
        Ok(Self { series })
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.name() == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.iter().map(TimeSeries::name)
    }

    pub fn into_inner(self) -> Vec<TimeSeries> {
        self.series
    }
}

/// One variable's observations split into labelled groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSample {
    variable_name: String,
    groups: Vec<(String, Vec<f64>)>,
}

impl GroupedSample {
    pub fn new(variable_name: impl Into<String>, groups: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "groups",
                reason: "at least two groups are required",
            });
        }
        for (_, obs) in &groups {
            if obs.len() < 2 {
                return Err(Error::TooShort {
                    need: 2,
                    got: obs.len(),
                });
            }
            if let Some((index, &value)) = obs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(Self {
            variable_name: variable_name.into(),
            groups,
        })
    }

    pub fn variable_name(&self) -> &str {
        &self.variable_name
    }

    pub fn groups(&self) -> &[(String, Vec<f64>)] {
        &self.groups
    }

    pub fn total_len(&self) -> usize {
        self.groups.iter().map(|(_, g)| g.len()).sum()
    }
}
