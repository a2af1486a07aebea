//! Elasticities of outcome probabilities with respect to continuous
//! explanatory variables.
//!
//! For a variable `x` with coefficient `beta` in outcome `i`'s utility, the
//! per-observation elasticities are
//!
//! - direct: `(1 - P_i) * beta * x` (effect on outcome `i` itself),
//! - cross: `-P_i * beta * x` (effect on every other outcome `j != i`).
//!
//! The cross elasticity does not depend on which other outcome `j` is asked
//! about, so with three outcomes the two cross entries of one coefficient are
//! equal by construction. Reported values are arithmetic means over the exact
//! estimation sample of the fit. A variable with |elasticity| below one is
//! inelastic, at or above one elastic.
//!
//! Indicator variables are refused: an infinitesimal percentage change of a
//! 0/1 variable is meaningless, and the discrete-change pseudo-elasticity
//! replacement is deliberately out of scope.

use crate::dataset::{Dataset, VariableKind};
use crate::error::Error;
use crate::logit::{Design, ModelSpec};
use crate::mle::FitResult;
use crate::num;
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Direct elasticity of outcome `i`'s probability with respect to a variable
/// in its own utility.
pub fn direct_elasticity(p_i: f64, beta_ik: f64, x_k: f64) -> f64 {
    (1.0 - p_i) * beta_ik * x_k
}

/// Cross elasticity of any other outcome's probability with respect to a
/// variable in outcome `j`'s utility.
pub fn cross_elasticity(p_j: f64, beta_jk: f64, x_k: f64) -> f64 {
    -p_j * beta_jk * x_k
}

/// Elastic / inelastic classification, threshold-exact at one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElasticityClass {
    Elastic,
    Inelastic,
}

pub fn classify(elasticity: f64) -> ElasticityClass {
    if elasticity.abs() < 1.0 {
        ElasticityClass::Inelastic
    } else {
        ElasticityClass::Elastic
    }
}

/// Averaged direct and cross elasticities of one variable's coefficient in
/// one outcome's utility.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeElasticity {
    /// Outcome whose utility carries the coefficient.
    pub outcome: String,
    pub block: usize,
    /// Mean `(1 - P_i) beta x` over the estimation sample.
    pub direct: f64,
    /// Mean `-P_i beta x`; applies equally to every other outcome.
    pub cross: f64,
}

/// Averaged elasticities of one variable across all outcomes it enters.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityReport {
    pub variable: String,
    /// Rows averaged over (the fit's estimation sample).
    pub n_averaged: usize,
    pub per_outcome: Vec<OutcomeElasticity>,
}

/// Compute averaged elasticities of `variable` for a converged fit. The
/// estimation sample is re-derived from `(spec, ds)`, which must be the pair
/// the fit came from.
pub fn averaged_elasticities(
    spec: &ModelSpec,
    ds: &Dataset,
    fit: &FitResult,
    variable: &str,
) -> Result<ElasticityReport> {
    let var_spec = ds.schema().get(variable)?;
    match var_spec.kind {
        VariableKind::Quantitative => {}
        VariableKind::Indicator | VariableKind::DerivedIndicator | VariableKind::Categorical => {
            return Err(Error::InvalidSpec(format!(
                "`{variable}` is not continuous: elasticities are undefined for \
                 discrete variables and pseudo-elasticities are out of scope"
            )));
        }
    }
    if !fit.converged {
        return Err(Error::Inconsistent(
            "elasticities need a converged fit".to_string(),
        ));
    }
    let design = Design::build(spec, ds)?;
    if design.n_rows() != fit.n_used {
        return Err(Error::Inconsistent(format!(
            "estimation sample has {} rows but the fit used {}",
            design.n_rows(),
            fit.n_used
        )));
    }

    // Blocks whose utility contains the variable.
    let carriers: Vec<(usize, usize)> = (0..spec.levels.len() - 1)
        .filter_map(|b| design.block_term_col(b, variable).map(|c| (b, c)))
        .collect();
    if carriers.is_empty() {
        return Err(Error::UnknownVariable {
            name: format!("{variable} (not in the model)"),
        });
    }

    let n = design.n_rows();
    let mut per_outcome = Vec::with_capacity(carriers.len());
    for (block, col) in carriers {
        let beta = fit.beta[design.param_index(block, col)];
        let mut direct_terms = Vec::with_capacity(n);
        let mut cross_terms = Vec::with_capacity(n);
        for row in 0..n {
            let p = design.probabilities(&fit.beta, row)?;
            let x = design.x_value(block, row, col);
            direct_terms.push(direct_elasticity(p[block], beta, x));
            cross_terms.push(cross_elasticity(p[block], beta, x));
        }
        per_outcome.push(OutcomeElasticity {
            outcome: spec.levels[block].label.clone(),
            block,
            direct: num::mean_pairwise(&direct_terms),
            cross: num::mean_pairwise(&cross_terms),
        });
    }
    Ok(ElasticityReport {
        variable: variable.to_string(),
        n_averaged: n,
        per_outcome,
    })
}
