//! Error type shared by every module of the crate.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Everything that can go wrong while building datasets, fitting models or
/// running tests. Carries enough context to produce a useful message without
/// needing a backtrace.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A variable name was not found in the schema.
    UnknownVariable { name: String },
    /// A variable name is already taken.
    DuplicateVariable { name: String },
    /// A variable has the wrong kind for the requested operation.
    KindMismatch {
        name: String,
        expected: &'static str,
    },
    /// A cell value violates the schema (bad indicator value, non-finite
    /// quantitative value, undeclared categorical code).
    InvalidValue {
        row: usize,
        column: String,
        message: String,
    },
    /// A specification is malformed (bin edges out of order, overlapping
    /// partition rules, empty outcome list, ...).
    InvalidSpec(String),
    /// Every value of a variable is missing.
    AllMissing { name: String },
    /// Vector/matrix dimensions do not line up.
    Dimension { expected: usize, got: usize },
    /// Not enough observations to identify the requested coefficients.
    Underdetermined { n_used: usize, k: usize },
    /// An outcome level has no observations in the estimation sample.
    DegenerateOutcome { outcome: String },
    /// Coefficients diverged; quasi-complete separation suspected.
    Separation { max_abs_beta: f64 },
    /// The design columns are linearly dependent.
    Collinear { columns: Vec<String> },
    /// Per-bin log-likelihoods sum below the pooled log-likelihood, so the
    /// fits cannot come from a true partition of the sample.
    NestingViolation { ll_pooled: f64, ll_sum: f64 },
    /// Inputs are mutually inconsistent (e.g. LL above its restricted value).
    Inconsistent(String),
    /// An error raised while working on a named subset (partition, bin).
    Subset {
        label: String,
        source: Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownVariable { name } => write!(f, "unknown variable `{name}`"),
            Error::DuplicateVariable { name } => write!(f, "variable `{name}` already exists"),
            Error::KindMismatch { name, expected } => {
                write!(f, "variable `{name}` is not {expected}")
            }
            Error::InvalidValue {
                row,
                column,
                message,
            } => write!(f, "row {row}, column `{column}`: {message}"),
            Error::InvalidSpec(msg) => write!(f, "invalid specification: {msg}"),
            Error::AllMissing { name } => write!(f, "all values of `{name}` are missing"),
            Error::Dimension { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Underdetermined { n_used, k } => write!(
                f,
                "underdetermined model: {n_used} usable observations for {k} coefficients"
            ),
            Error::DegenerateOutcome { outcome } => {
                write!(f, "outcome `{outcome}` has no observations")
            }
            Error::Separation { max_abs_beta } => write!(
                f,
                "coefficients diverged (max |beta| = {max_abs_beta}); quasi-complete separation suspected"
            ),
            Error::Collinear { columns } => {
                write!(f, "collinear design columns: ")?;
                for (i, c) in columns.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "`{c}`")?;
                }
                Ok(())
            }
            Error::NestingViolation { ll_pooled, ll_sum } => write!(
                f,
                "per-bin log-likelihoods sum to {ll_sum}, below the pooled {ll_pooled}; \
                 the models were not estimated on a true partition"
            ),
            Error::Inconsistent(msg) => write!(f, "inconsistent inputs: {msg}"),
            Error::Subset { label, source } => write!(f, "in subset `{label}`: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Subset { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl Error {
    /// Wrap an error with the label of the subset it occurred in.
    pub fn in_subset(self, label: impl Into<String>) -> Error {
        Error::Subset {
            label: label.into(),
            source: Box::new(self),
        }
    }
}
