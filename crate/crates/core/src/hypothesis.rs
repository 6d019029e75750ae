//! Marginal tests: pooled two-sample t and one-way F, with the Student t and
//! Fisher F distribution functions they need.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::GroupedSample;
use crate::special::{beta_inc, beta_inc_upper};

fn check_dof(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "degrees of freedom must be positive and finite",
        })
    }
}

/// Student t distribution function.
pub fn t_cdf(x: f64, nu: f64) -> Result<f64> {
    check_dof("nu", nu)?;
    if x.is_nan() {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "NaN",
        });
    }
    let tail = 0.5 * t_two_sided(x, nu);
    Ok(if x >= 0.0 { 1.0 - tail } else { tail })
}

/// `P(|T| >= |x|)` for `T ~ t(nu)`, computed as `I_{nu/(nu+x^2)}(nu/2, 1/2)`.
fn t_two_sided(x: f64, nu: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    beta_inc(0.5 * nu, 0.5, nu / (nu + x * x))
}

/// Fisher F distribution function.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_dof("d1", d1)?;
    check_dof("d2", d2)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "F quantiles are non-negative",
        });
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(beta_inc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2)))
}

/// `1 - f_cdf(x, d1, d2)` evaluated directly on the upper tail.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_dof("d1", d1)?;
    check_dof("d2", d2)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "F quantiles are non-negative",
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(beta_inc_upper(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    TwoSampleT,
    OneWayF,
}

impl TestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::TwoSampleT => "two-sample-t",
            TestKind::OneWayF => "one-way-F",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dof {
    One(f64),
    Two(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub variable_name: String,
    pub statistic: f64,
    pub dof: Dof,
    pub p_value: f64,
    pub kind: TestKind,
}

impl TestResult {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.variable_name = name.into();
        self
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sum_sq_dev(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

fn check_group(g: &[f64]) -> Result<()> {
    if g.len() < 2 {
        return Err(Error::TooShort { need: 2, got: g.len() });
    }
    if let Some((index, &value)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(())
}

/// Pooled-variance two-sample t-test with a two-sided p-value.
///
/// `T = (mean1 - mean2) / (S_p sqrt((n1 + n2) / (n1 n2)))` on `n1 + n2 - 2`
/// degrees of freedom. The result carries an empty variable name; see
/// [`TestResult::named`].
pub fn two_sample_t(group1: &[f64], group2: &[f64]) -> Result<TestResult> {
    check_group(group1)?;
    check_group(group2)?;
    let (n1, n2) = (group1.len() as f64, group2.len() as f64);
    let (m1, m2) = (mean(group1), mean(group2));
    let dof = n1 + n2 - 2.0;
    let pooled = (sum_sq_dev(group1, m1) + sum_sq_dev(group2, m2)) / dof;
    if !(pooled > 0.0) {
        return Err(Error::Degenerate("pooled variance is zero"));
    }
    let t = (m1 - m2) / (libm::sqrt(pooled) * libm::sqrt((n1 + n2) / (n1 * n2)));
    Ok(TestResult {
        variable_name: String::new(),
        statistic: t,
        dof: Dof::One(dof),
        p_value: t_two_sided(t, dof).clamp(0.0, 1.0),
        kind: TestKind::TwoSampleT,
    })
}

/// One-way analysis of variance over `k` groups on `(k - 1, N - k)` degrees
/// of freedom.
pub fn one_way_f(sample: &GroupedSample) -> Result<TestResult> {
    let groups: Vec<&[f64]> = sample.groups().iter().map(|(_, g)| g.as_slice()).collect();
    for g in &groups {
        check_group(g)?;
    }
    let k = groups.len() as f64;
    let n = sample.total_len() as f64;
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n;
    let mut between = 0.0;
    let mut within = 0.0;
    for g in &groups {
        let m = mean(g);
        between += g.len() as f64 * (m - grand) * (m - grand);
        within += sum_sq_dev(g, m);
    }
    if !(within > 0.0) {
        return Err(Error::Degenerate("within-group variance is zero"));
    }
    let (d1, d2) = (k - 1.0, n - k);
    let f = (between / d1) / (within / d2);
    Ok(TestResult {
        variable_name: sample.variable_name().into(),
        statistic: f,
        dof: Dof::Two(d1, d2),
        p_value: f_sf(f, d1, d2)?.clamp(0.0, 1.0),
        kind: TestKind::OneWayF,
    })
}
