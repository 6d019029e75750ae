//! FWER-controlling multiple test procedures.
//!
//! Every procedure rejects `H_i` only when `p_i` is strictly below its
//! threshold. Step procedures order p-values stably (ties by original
//! index); reports carry the threshold each hypothesis was compared with
//! rather than adjusted p-values.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Procedure {
    Bonferroni,
    Holm,
    SidakSingleStep,
    SidakStepDown,
    Hochberg,
}

impl Procedure {
    pub const ALL: [Procedure; 5] = [
        Procedure::Bonferroni,
        Procedure::Holm,
        Procedure::SidakSingleStep,
        Procedure::SidakStepDown,
        Procedure::Hochberg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Procedure::Bonferroni => "bonferroni",
            Procedure::Holm => "holm",
            Procedure::SidakSingleStep => "sidak_ss",
            Procedure::SidakStepDown => "sidak_sd",
            Procedure::Hochberg => "hochberg",
        }
    }

    pub fn apply(&self, p: &[f64], alpha: f64) -> Result<MtpReport> {
        match self {
            Procedure::Bonferroni => bonferroni(p, alpha),
            Procedure::Holm => holm(p, alpha),
            Procedure::SidakSingleStep => sidak_ss(p, alpha),
            Procedure::SidakStepDown => sidak_sd(p, alpha),
            Procedure::Hochberg => hochberg(p, alpha),
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownProcedure;

impl fmt::Display for UnknownProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown procedure; expected one of bonferroni, holm, sidak_ss, sidak_sd, hochberg")
    }
}

impl core::error::Error for UnknownProcedure {}

impl FromStr for Procedure {
    type Err = UnknownProcedure;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        Procedure::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or(UnknownProcedure)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MtpReport {
    pub procedure: Procedure,
    pub alpha: f64,
    /// `true` rejects the hypothesis at that position.
    pub decisions: Vec<bool>,
    /// `R_m`.
    pub rejection_count: usize,
    pub adjusted_thresholds: Vec<f64>,
}

impl MtpReport {
    fn new(procedure: Procedure, alpha: f64, decisions: Vec<bool>, adjusted_thresholds: Vec<f64>) -> Self {
        let rejection_count = decisions.iter().filter(|&&d| d).count();
        Self {
            procedure,
            alpha,
            decisions,
            rejection_count,
            adjusted_thresholds,
        }
    }
}

fn validate(p: &[f64], alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must lie in (0, 1)",
        });
    }
    if p.is_empty() {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "at least one p-value is required",
        });
    }
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::PValueOutOfRange { index, value });
    }
    Ok(())
}

/// Local level `1 - (1 - alpha)^(1/m)`.
pub fn sidak_level(alpha: f64, m: usize) -> f64 {
    -libm::expm1(libm::log1p(-alpha) / m as f64)
}

fn ascending(p: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]).then(i.cmp(&j)));
    order
}

fn single_step(procedure: Procedure, p: &[f64], alpha: f64, level: f64) -> MtpReport {
    let decisions = p.iter().map(|&pi| pi < level).collect();
    MtpReport::new(procedure, alpha, decisions, vec![level; p.len()])
}

/// Step-down over ascending p-values; `threshold(j)` for the 0-based rank `j`.
fn step_down(procedure: Procedure, p: &[f64], alpha: f64, threshold: impl Fn(usize) -> f64) -> MtpReport {
    let mut decisions = vec![false; p.len()];
    let mut thresholds = vec![0.0; p.len()];
    let mut going = true;
    for (j, &i) in ascending(p).iter().enumerate() {
        thresholds[i] = threshold(j);
        going = going && p[i] < thresholds[i];
        decisions[i] = going;
    }
    MtpReport::new(procedure, alpha, decisions, thresholds)
}

pub fn bonferroni(p: &[f64], alpha: f64) -> Result<MtpReport> {
    validate(p, alpha)?;
    Ok(single_step(Procedure::Bonferroni, p, alpha, alpha / p.len() as f64))
}

pub fn holm(p: &[f64], alpha: f64) -> Result<MtpReport> {
    validate(p, alpha)?;
    let m = p.len();
    Ok(step_down(Procedure::Holm, p, alpha, |j| alpha / (m - j) as f64))
}

pub fn sidak_ss(p: &[f64], alpha: f64) -> Result<MtpReport> {
    validate(p, alpha)?;
    Ok(single_step(Procedure::SidakSingleStep, p, alpha, sidak_level(alpha, p.len())))
}

pub fn sidak_sd(p: &[f64], alpha: f64) -> Result<MtpReport> {
    validate(p, alpha)?;
    let m = p.len();
    Ok(step_down(Procedure::SidakStepDown, p, alpha, |j| sidak_level(alpha, m - j)))
}

/// Step-up: scanning from the largest p-value with thresholds
/// `alpha/1, alpha/2, ...`, the first p-value below its threshold is
/// rejected together with every smaller one.
pub fn hochberg(p: &[f64], alpha: f64) -> Result<MtpReport> {
    validate(p, alpha)?;
    let m = p.len();
    let order = ascending(p);
    let mut thresholds = vec![0.0; m];
    for (j, &i) in order.iter().enumerate() {
        thresholds[i] = alpha / (m - j) as f64;
    }
    let cut = order.iter().rposition(|&i| p[i] < thresholds[i]).map_or(0, |j| j + 1);
    let mut decisions = vec![false; m];
    for &i in &order[..cut] {
        decisions[i] = true;
    }
    Ok(MtpReport::new(Procedure::Hochberg, alpha, decisions, thresholds))
}
