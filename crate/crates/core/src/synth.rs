//! Synthetic data generation from known logit models, plus brute-force
//! oracles used by the test suites.
//!
//! Generation is driven by one [`SplitMix64`](crate::rng::SplitMix64) stream
//! per `(seed, purpose)` pair: each covariate, each missingness mask and the
//! outcome draw have their own stream, so adding a column never shifts the
//! draws of the others and the same seed reproduces a dataset byte for byte.

use crate::dataset::{Dataset, Schema, VariableSpec};
use crate::error::Error;
use crate::logit::{self, ModelSpec, OutcomeLevel};
use crate::mle::{self, OptimizerConfig};
use crate::rng::SplitMix64;
use crate::selection::aic;
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// Distribution of one generated covariate.
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateDistribution {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    Bernoulli { p: f64 },
}

/// One generated covariate column.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    pub name: String,
    pub distribution: CovariateDistribution,
    /// Fraction of values masked as missing (independent of everything else).
    pub missing_rate: f64,
}

impl CovariateSpec {
    pub fn normal(name: impl Into<String>, mean: f64, sd: f64) -> Self {
        CovariateSpec {
            name: name.into(),
            distribution: CovariateDistribution::Normal { mean, sd },
            missing_rate: 0.0,
        }
    }

    pub fn uniform(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        CovariateSpec {
            name: name.into(),
            distribution: CovariateDistribution::Uniform { lo, hi },
            missing_rate: 0.0,
        }
    }

    pub fn bernoulli(name: impl Into<String>, p: f64) -> Self {
        CovariateSpec {
            name: name.into(),
            distribution: CovariateDistribution::Bernoulli { p },
            missing_rate: 0.0,
        }
    }

    pub fn with_missing_rate(mut self, rate: f64) -> Self {
        self.missing_rate = rate;
        self
    }
}

/// Everything needed to generate a dataset from a known model.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub seed: u64,
    pub covariates: Vec<CovariateSpec>,
    pub outcome: String,
    /// Outcome levels, base last; level `i` is coded `i` in the data.
    pub levels: Vec<OutcomeLevel>,
    /// True coefficients per non-base outcome: `[intercept, one per
    /// covariate in declaration order]`.
    pub beta: Vec<Vec<f64>>,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::InvalidSpec(
                "generator needs at least two outcome levels".into(),
            ));
        }
        if self.beta.len() + 1 != self.levels.len() {
            return Err(Error::InvalidSpec(format!(
                "{} outcome levels need {} coefficient vectors, got {}",
                self.levels.len(),
                self.levels.len() - 1,
                self.beta.len()
            )));
        }
        for b in &self.beta {
            if b.len() != self.covariates.len() + 1 {
                return Err(Error::InvalidSpec(format!(
                    "coefficient vectors must have length {} (intercept + covariates)",
                    self.covariates.len() + 1
                )));
            }
        }
        for c in &self.covariates {
            if !(0.0..=1.0).contains(&c.missing_rate) {
                return Err(Error::InvalidSpec(format!(
                    "missing rate of `{}` is outside [0, 1]",
                    c.name
                )));
            }
        }
        Ok(())
    }

    /// The model spec this generator realizes (all covariates, shared lists).
    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec::shared(
            self.outcome.clone(),
            self.levels.clone(),
            self.covariates.iter().map(|c| c.name.clone()).collect(),
        )
    }
}

/// Draw a dataset from the generator. Outcomes are drawn from the model
/// probabilities at the complete covariate values; missingness masks are
/// applied afterwards, so they are independent of the outcome.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n;

    // Covariate values, one stream per column.
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(spec.covariates.len());
    for cov in &spec.covariates {
        let mut rng = SplitMix64::stream(spec.seed, &format!("var:{}", cov.name));
        let col = (0..n)
            .map(|_| match cov.distribution {
                CovariateDistribution::Normal { mean, sd } => mean + sd * rng.next_normal(),
                CovariateDistribution::Uniform { lo, hi } => rng.next_range(lo, hi),
                CovariateDistribution::Bernoulli { p } => rng.next_bernoulli(p) as u8 as f64,
            })
            .collect();
        values.push(col);
    }

    // Outcome draws at the true coefficients.
    let mut outcome_rng = SplitMix64::stream(spec.seed, "outcome");
    let i_count = spec.levels.len();
    let mut outcome = Vec::with_capacity(n);
    let mut utilities = vec![0.0; i_count];
    for r in 0..n {
        for (b, beta) in spec.beta.iter().enumerate() {
            let mut u = beta[0];
            for (c, col) in values.iter().enumerate() {
                u += beta[c + 1] * col[r];
            }
            utilities[b] = u;
        }
        utilities[i_count - 1] = 0.0;
        let p = logit::probabilities_from_utilities(&utilities);
        let draw = outcome_rng.next_categorical(&p);
        outcome.push(Some(spec.levels[draw].value));
    }

    // Missingness masks.
    let mut columns: Vec<Vec<Option<f64>>> = Vec::with_capacity(spec.covariates.len() + 1);
    columns.push(outcome);
    for (cov, col) in spec.covariates.iter().zip(values) {
        let mut mask_rng = SplitMix64::stream(spec.seed, &format!("miss:{}", cov.name));
        columns.push(
            col.into_iter()
                .map(|v| {
                    if cov.missing_rate > 0.0 && mask_rng.next_f64() < cov.missing_rate {
                        None
                    } else {
                        Some(v)
                    }
                })
                .collect(),
        );
    }

    let mut vars = vec![VariableSpec::categorical(
        spec.outcome.clone(),
        spec.levels
            .iter()
            .map(|l| (l.value, l.label.clone()))
            .collect(),
    )];
    for cov in &spec.covariates {
        vars.push(match cov.distribution {
            CovariateDistribution::Bernoulli { .. } => VariableSpec::indicator(cov.name.clone()),
            _ => VariableSpec::quantitative(cov.name.clone()),
        });
    }
    let schema = Schema::new(vars)?;
    Dataset::from_columns(
        schema,
        columns,
        format!("synthetic:{}:seed={}", crate::rng::ALGORITHM, spec.seed),
    )
}

/// Best subset found by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveBest {
    pub variables: Vec<String>,
    pub aic: f64,
    /// Subsets whose fit failed, with the reason.
    pub skipped: Vec<(Vec<String>, String)>,
}

/// Enumerate every subset of `candidates` (at most 12), fit each with
/// intercepts on the full sample and return the AIC-minimal subset. Ties are
/// broken toward the smaller subset, then lexicographically. The dataset must
/// have no missing values among the candidates and the outcome, so all
/// enumerated fits share one sample and their AICs are comparable.
pub fn exhaustive_aic(
    ds: &Dataset,
    candidates: &[String],
    outcome: &str,
    levels: &[OutcomeLevel],
    cfg: &OptimizerConfig,
) -> Result<ExhaustiveBest> {
    if candidates.len() > 12 {
        return Err(Error::InvalidSpec(format!(
            "exhaustive enumeration is capped at 12 candidates, got {}",
            candidates.len()
        )));
    }
    let mut check_vars: Vec<String> = candidates.to_vec();
    check_vars.push(String::from(outcome));
    let (_, removed) = ds.complete_cases(&check_vars)?;
    if removed != 0 {
        return Err(Error::InvalidSpec(
            "the exhaustive oracle requires a dataset with no missing values".into(),
        ));
    }

    let mut best: Option<(Vec<String>, f64)> = None;
    let mut skipped = Vec::new();
    for mask in 0u32..(1 << candidates.len()) {
        let subset: Vec<String> = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect();
        let spec = ModelSpec::shared(outcome, levels.to_vec(), subset.clone());
        match mle::fit(&spec, ds, cfg) {
            Ok(fit) if fit.converged => {
                let a = aic(fit.ll, fit.k);
                let better = match &best {
                    None => true,
                    Some((bv, ba)) => {
                        a < *ba
                            || (a == *ba
                                && (subset.len() < bv.len()
                                    || (subset.len() == bv.len() && subset < *bv)))
                    }
                };
                if better {
                    best = Some((subset, a));
                }
            }
            Ok(fit) => skipped.push((subset, format!("non-converged (separation = {})", fit.separation))),
            Err(e) => skipped.push((subset, e.to_string())),
        }
    }
    let (variables, aic) = best.ok_or_else(|| {
        Error::InvalidSpec("every enumerated subset failed to fit".into())
    })?;
    Ok(ExhaustiveBest {
        variables,
        aic,
        skipped,
    })
}

/// Central-difference gradient with componentwise step
/// `h_k = max(step, 1e-7 |x_k|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, point: &[f64], step: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(point.len());
    let mut work = point.to_vec();
    for k in 0..point.len() {
        let h = step.max(1e-7 * point[k].abs());
        work[k] = point[k] + h;
        let up = f(&work);
        work[k] = point[k] - h;
        let down = f(&work);
        work[k] = point[k];
        grad.push((up - down) / (2.0 * h));
    }
    grad
}
