//! Statistical machinery: special functions, distribution CDFs, normality
//! and variance checks, and the rank-based comparison tests.

pub mod dist;
pub mod nonparametric;
pub mod parametric;
pub mod shapiro;
mod special;

pub use nonparametric::{
    average_ranks, friedman, holm, nemenyi, nemenyi_critical_difference, wilcoxon_signed_rank,
    FriedmanResult, HolmResult, NemenyiResult, WilcoxonMethod, WilcoxonResult,
};
pub use parametric::{levene, paired_t, LeveneResult, PairedTResult};
pub use shapiro::{shapiro_wilk, ShapiroResult};
