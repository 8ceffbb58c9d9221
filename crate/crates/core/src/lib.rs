//! Core engine for leakage-safe machine-learning experimentation: dataset
//! loading and validation, fit/apply transforms, from-scratch learners,
//! stratified cross-validation with statistical comparison of the results,
//! and a reproducible experiment runner.

pub mod analysis;
pub mod canon;
pub mod compare;
pub mod data;
pub mod error;
pub mod matrix;
pub mod rng;
pub mod evaluate;
pub mod learn;
pub mod runner;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use matrix::Matrix;
