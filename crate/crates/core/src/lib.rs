//! Discrete-choice modeling core: binary and multinomial logit models fitted
//! by maximum likelihood, AIC-guided stepwise variable selection, structural
//! likelihood-ratio tests across data partitions, and probability elasticities.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! come from [`libm`] so results are bit-identical across platforms. File
//! formats, CSV/JSON ingestion and the command-line front end live in the
//! companion `choicefit` crate.
//!
//! Module overview:
//!
//! - [`dataset`] — tabular data with explicit missing values, derived
//!   indicator variables, partitioning and binning,
//! - [`logit`] — model specification, probabilities, log-likelihood and its
//!   analytic derivatives,
//! - [`mle`] — Newton-Raphson fitting with covariance, t-ratios and AIC,
//! - [`selection`] — stepwise procedures A and B with an auditable trace,
//! - [`inference`] — chi-squared tail probabilities and likelihood-ratio
//!   test harnesses (pooling and bin-structure tests),
//! - [`elasticity`] — direct, cross and observation-averaged elasticities,
//! - [`synth`] — seeded data generation and brute-force test oracles.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod elasticity;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod logit;
pub mod mle;
pub(crate) mod num;
pub mod rng;
pub mod selection;
pub mod synth;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
