//! Singular spectrum analysis (univariate and multivariate) for denoising
//! and gap filling, denoising diagnostics, marginal two-group / k-group
//! tests and FWER-controlling multiple test procedures.
//!
//! The crate is `no_std` and only needs an allocator. File formats and the
//! command line live in the `ssamt` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod error;
pub mod hypothesis;
pub mod imputation;
pub mod linalg;
pub mod mssa;
pub mod mtp;
pub mod series;
pub mod simulation;
pub mod special;
pub mod ssa;

pub use diagnostics::{
    goodness_of_denoising, rmae, rmse, roughness, rrmse, snr, w_correlation, DenoisingScore,
};
pub use error::{Error, Result};
pub use hypothesis::{f_cdf, f_sf, one_way_f, t_cdf, two_sample_t, Dof, TestKind, TestResult};
pub use imputation::{impute, ImputeOptions, Imputation};
pub use linalg::Matrix;
pub use mssa::{embed_multi, mssa_denoise, mssa_denoise_with, MssaPlan};
pub use mtp::{bonferroni, hochberg, holm, sidak_sd, sidak_ss, MtpReport, Procedure};
pub use series::{GroupedSample, MultiSeries, TimeSeries};
pub use simulation::{
    add_noise, generate_signal, run_replication, run_study, SignalKind, SignalModel, SimReport,
    StudyConfig,
};
pub use ssa::{
    decompose, default_window, embed, hankelize, reconstruct_group, ssa_denoise, ssa_denoise_with,
    Eigentriple, Grouping, RankRule, SsaDecomposition, TrajectoryMatrix,
};
