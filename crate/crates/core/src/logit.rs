//! Multinomial logit mathematics.
//!
//! A model assigns each outcome `i` a linear utility `u_i = beta_i' x_i` and
//! outcome probabilities `P_i = exp(u_i) / sum_j exp(u_j)`. The last declared
//! outcome is the base: its coefficient vector is normalized to zero, which
//! pins the otherwise arbitrary common factor in numerator and denominator.
//! With two outcomes this reduces to the familiar binary logit
//! `P_1 = exp(u_1) / (exp(u_1) + 1)`.
//!
//! All probability work is done in log space with max subtraction, so linear
//! predictors of magnitude several hundred stay finite.

use crate::dataset::{Dataset, VariableKind};
use crate::error::Error;
use crate::linalg::Matrix;
use crate::num;
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// One outcome level: display label plus the code it takes in the data.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeLevel {
    pub label: String,
    pub value: f64,
}

impl OutcomeLevel {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        OutcomeLevel {
            label: label.into(),
            value,
        }
    }
}

/// Explanatory variables entering one non-base outcome's utility.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    /// Include the implicit constant regressor "1". On by default;
    /// suppression is opt-in.
    pub intercept: bool,
    pub terms: Vec<String>,
}

impl BlockSpec {
    pub fn with_intercept(terms: Vec<String>) -> Self {
        BlockSpec {
            intercept: true,
            terms,
        }
    }
}

/// Full model description: outcome variable, ordered levels (last is base)
/// and per-outcome explanatory lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub outcome: String,
    pub levels: Vec<OutcomeLevel>,
    /// One block per non-base outcome, in level order. The base outcome's
    /// coefficients are identically zero.
    pub blocks: Vec<BlockSpec>,
}

impl ModelSpec {
    /// Model where every non-base outcome shares the same covariate list.
    pub fn shared(
        outcome: impl Into<String>,
        levels: Vec<OutcomeLevel>,
        terms: Vec<String>,
    ) -> Self {
        let blocks = (0..levels.len().saturating_sub(1))
            .map(|_| BlockSpec::with_intercept(terms.clone()))
            .collect();
        ModelSpec {
            outcome: outcome.into(),
            levels,
            blocks,
        }
    }

    /// Intercepts-only model over the same outcomes.
    pub fn intercept_only(&self) -> ModelSpec {
        ModelSpec {
            outcome: self.outcome.clone(),
            levels: self.levels.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|_| BlockSpec::with_intercept(Vec::new()))
                .collect(),
        }
    }

    pub fn n_outcomes(&self) -> usize {
        self.levels.len()
    }

    /// Distinct dataset variables the model reads, outcome excluded.
    pub fn explanatory_variables(&self) -> Vec<String> {
        let mut vars: Vec<String> = Vec::new();
        for b in &self.blocks {
            for t in &b.terms {
                if !vars.contains(t) {
                    vars.push(t.clone());
                }
            }
        }
        vars
    }

    /// True when every non-base outcome uses the same covariate list.
    pub fn is_shared(&self) -> bool {
        self.blocks.windows(2).all(|w| w[0] == w[1])
    }

    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::InvalidSpec(
                "a model needs at least two outcome levels".into(),
            ));
        }
        if self.blocks.len() + 1 != self.levels.len() {
            return Err(Error::InvalidSpec(format!(
                "{} outcome levels need {} coefficient blocks, got {}",
                self.levels.len(),
                self.levels.len() - 1,
                self.blocks.len()
            )));
        }
        for (i, a) in self.levels.iter().enumerate() {
            for b in &self.levels[..i] {
                if a.value == b.value || a.label == b.label {
                    return Err(Error::InvalidSpec(format!(
                        "duplicate outcome level `{}`",
                        a.label
                    )));
                }
            }
        }
        ds.schema().get(&self.outcome)?;
        let mut k = 0usize;
        for block in &self.blocks {
            k += block.intercept as usize + block.terms.len();
            for (i, t) in block.terms.iter().enumerate() {
                if block.terms[..i].contains(t) {
                    return Err(Error::InvalidSpec(format!(
                        "variable `{t}` appears twice in one outcome's list"
                    )));
                }
                if *t == self.outcome {
                    return Err(Error::InvalidSpec(format!(
                        "outcome variable `{t}` cannot be a regressor"
                    )));
                }
                let spec = ds.schema().get(t)?;
                if spec.kind == VariableKind::Categorical {
                    return Err(Error::KindMismatch {
                        name: t.clone(),
                        expected: "quantitative or indicator (derive indicators from categorical variables)",
                    });
                }
            }
        }
        if k == 0 {
            return Err(Error::InvalidSpec(
                "model has no free coefficients".into(),
            ));
        }
        Ok(())
    }
}

/// Name of one free coefficient: outcome label plus regressor name
/// ("constant" for the intercept).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamName {
    pub outcome: String,
    pub term: String,
}

pub const CONSTANT: &str = "constant";

struct DesignBlock {
    offset: usize,
    cols: usize,
    /// Row-major n x cols.
    data: Vec<f64>,
}

/// Materialized estimation problem: complete-case rows of the model's
/// variables, observed outcome indices and per-outcome regressor matrices.
/// Built once per (model, sample) pair and reused across evaluations.
pub struct Design {
    n: usize,
    i_count: usize,
    y: Vec<u32>,
    blocks: Vec<DesignBlock>,
    names: Vec<ParamName>,
    level_labels: Vec<String>,
    k: usize,
}

impl Design {
    /// Gather the complete-case design for `spec` from `ds`. Rows missing any
    /// model variable, or whose outcome value matches no declared level, are
    /// excluded.
    pub fn build(spec: &ModelSpec, ds: &Dataset) -> Result<Design> {
        spec.validate(ds)?;
        let outcome_col = ds.column(&spec.outcome)?;
        let vars = spec.explanatory_variables();
        let mut var_cols: Vec<&[Option<f64>]> = Vec::with_capacity(vars.len());
        for v in &vars {
            var_cols.push(ds.column(v)?);
        }
        let col_of = |name: &str| vars.iter().position(|v| v == name).unwrap();

        // Complete-case row selection.
        let mut rows: Vec<usize> = Vec::new();
        let mut y: Vec<u32> = Vec::new();
        'rows: for r in 0..ds.n_rows() {
            let out = match outcome_col[r] {
                Some(v) => v,
                None => continue,
            };
            let level = match spec.levels.iter().position(|l| l.value == out) {
                Some(i) => i,
                None => continue,
            };
            for c in &var_cols {
                if c[r].is_none() {
                    continue 'rows;
                }
            }
            rows.push(r);
            y.push(level as u32);
        }
        let n = rows.len();

        let mut blocks = Vec::with_capacity(spec.blocks.len());
        let mut names = Vec::new();
        let mut offset = 0usize;
        for (b, block_spec) in spec.blocks.iter().enumerate() {
            let cols = block_spec.intercept as usize + block_spec.terms.len();
            let mut data = Vec::with_capacity(n * cols);
            for &r in &rows {
                if block_spec.intercept {
                    data.push(1.0);
                }
                for t in &block_spec.terms {
                    data.push(var_cols[col_of(t)][r].unwrap());
                }
            }
            let outcome_label = spec.levels[b].label.clone();
            if block_spec.intercept {
                names.push(ParamName {
                    outcome: outcome_label.clone(),
                    term: CONSTANT.to_string(),
                });
            }
            for t in &block_spec.terms {
                names.push(ParamName {
                    outcome: outcome_label.clone(),
                    term: t.clone(),
                });
            }
            blocks.push(DesignBlock { offset, cols, data });
            offset += cols;
        }

        Ok(Design {
            n,
            i_count: spec.levels.len(),
            y,
            blocks,
            names,
            level_labels: spec.levels.iter().map(|l| l.label.clone()).collect(),
            k: offset,
        })
    }

    /// Design of the intercepts-only model over the exact same rows; this is
    /// what the restricted log-likelihood is computed on.
    pub fn intercepts_only(&self) -> Design {
        let blocks = (0..self.i_count - 1)
            .map(|b| DesignBlock {
                offset: b,
                cols: 1,
                data: vec![1.0; self.n],
            })
            .collect();
        let names = self.level_labels[..self.i_count - 1]
            .iter()
            .map(|label| ParamName {
                outcome: label.clone(),
                term: CONSTANT.to_string(),
            })
            .collect();
        Design {
            n: self.n,
            i_count: self.i_count,
            y: self.y.clone(),
            blocks,
            names,
            level_labels: self.level_labels.clone(),
            k: self.i_count - 1,
        }
    }

    /// Display label of outcome level `i`.
    pub fn level_label(&self, i: usize) -> &str {
        &self.level_labels[i]
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_outcomes(&self) -> usize {
        self.i_count
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn names(&self) -> &[ParamName] {
        &self.names
    }

    pub fn outcome_index(&self, row: usize) -> usize {
        self.y[row] as usize
    }

    /// Observations per outcome level.
    pub fn outcome_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.i_count];
        for &yi in &self.y {
            counts[yi as usize] += 1;
        }
        counts
    }

    /// Column index of `term` within `block`, if present.
    pub fn block_term_col(&self, block: usize, term: &str) -> Option<usize> {
        let off = self.blocks[block].offset;
        let cols = self.blocks[block].cols;
        self.names[off..off + cols]
            .iter()
            .position(|p| p.term == term)
    }

    /// Flat coefficient index of `(block, col)`.
    pub fn param_index(&self, block: usize, col: usize) -> usize {
        self.blocks[block].offset + col
    }

    /// Regressor value for `(block, row, col)`.
    pub fn x_value(&self, block: usize, row: usize, col: usize) -> f64 {
        let b = &self.blocks[block];
        b.data[row * b.cols + col]
    }

    fn fill_utilities(&self, beta: &[f64], row: usize, out: &mut [f64]) {
        for (b, block) in self.blocks.iter().enumerate() {
            let x = &block.data[row * block.cols..(row + 1) * block.cols];
            let w = &beta[block.offset..block.offset + block.cols];
            let mut u = 0.0;
            for (xi, wi) in x.iter().zip(w.iter()) {
                u += xi * wi;
            }
            out[b] = u;
        }
        out[self.i_count - 1] = 0.0;
    }

    /// Outcome probabilities for one row at the given coefficients.
    pub fn probabilities(&self, beta: &[f64], row: usize) -> Result<Vec<f64>> {
        check_len(beta, self.k)?;
        let mut u = vec![0.0; self.i_count];
        self.fill_utilities(beta, row, &mut u);
        Ok(probabilities_from_utilities(&u))
    }
}

fn check_len(beta: &[f64], k: usize) -> Result<()> {
    if beta.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: beta.len(),
        });
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidSpec("non-finite coefficient".into()));
    }
    Ok(())
}

/// Log probabilities from per-outcome utilities (log-sum-exp with max
/// subtraction, stable for predictors of any finite magnitude).
pub fn log_probabilities_from_utilities(utilities: &[f64]) -> Vec<f64> {
    let m = utilities.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut sum = 0.0;
    for &u in utilities {
        sum += num::exp(u - m);
    }
    let lse = m + num::ln(sum);
    utilities.iter().map(|&u| u - lse).collect()
}

/// Probabilities from per-outcome utilities. Results are floored at the
/// smallest positive normal number so extreme predictors cannot produce an
/// exact zero; the floor is far below every stated tolerance.
pub fn probabilities_from_utilities(utilities: &[f64]) -> Vec<f64> {
    log_probabilities_from_utilities(utilities)
        .iter()
        .map(|&l| num::exp(l).max(f64::MIN_POSITIVE))
        .collect()
}

/// Probabilities from the non-base linear predictors `beta_i' x`; the base
/// outcome's predictor is implicitly zero and comes last.
pub fn probabilities_from_predictors(predictors: &[f64]) -> Vec<f64> {
    let mut u = predictors.to_vec();
    u.push(0.0);
    probabilities_from_utilities(&u)
}

/// Fused log-likelihood, gradient and Hessian evaluation.
pub struct LogitEval {
    pub ll: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

struct Part {
    ll: f64,
    grad: Vec<f64>,
    hess: Option<Matrix>,
}

fn eval_chunks(design: &Design, beta: &[f64], derivatives: bool) -> Part {
    let k = design.k;
    let i_count = design.i_count;
    let mut parts: Vec<Part> = Vec::with_capacity(design.n.div_ceil(num::CHUNK).max(1));
    let mut u = vec![0.0; i_count];

    let mut row = 0;
    while row < design.n {
        let end = (row + num::CHUNK).min(design.n);
        let mut part = Part {
            ll: 0.0,
            grad: vec![0.0; if derivatives { k } else { 0 }],
            hess: derivatives.then(|| Matrix::zeros(k)),
        };
        for r in row..end {
            design.fill_utilities(beta, r, &mut u);
            let lp = log_probabilities_from_utilities(&u);
            let y = design.y[r] as usize;
            part.ll += lp[y];
            if derivatives {
                let hess = part.hess.as_mut().unwrap();
                let p: Vec<f64> = lp.iter().map(|&l| num::exp(l)).collect();
                for (b1, block1) in design.blocks.iter().enumerate() {
                    let x1 = &block1.data[r * block1.cols..(r + 1) * block1.cols];
                    let coef = (y == b1) as u8 as f64 - p[b1];
                    for (c1, &x1v) in x1.iter().enumerate() {
                        part.grad[block1.offset + c1] += coef * x1v;
                    }
                    for (b2, block2) in design.blocks.iter().enumerate() {
                        let w = p[b1] * ((b1 == b2) as u8 as f64 - p[b2]);
                        if w == 0.0 {
                            continue;
                        }
                        let x2 = &block2.data[r * block2.cols..(r + 1) * block2.cols];
                        for (c1, &x1v) in x1.iter().enumerate() {
                            let i = block1.offset + c1;
                            for (c2, &x2v) in x2.iter().enumerate() {
                                hess.add_to(i, block2.offset + c2, -(w * x1v * x2v));
                            }
                        }
                    }
                }
            }
        }
        parts.push(part);
        row = end;
    }

    num::reduce_pairwise(parts, |a, b| {
        a.ll += b.ll;
        for (ga, gb) in a.grad.iter_mut().zip(b.grad.iter()) {
            *ga += gb;
        }
        if let (Some(ha), Some(hb)) = (a.hess.as_mut(), b.hess.as_ref()) {
            ha.add_assign(hb);
        }
    })
    .unwrap_or(Part {
        ll: 0.0,
        grad: vec![0.0; if derivatives { k } else { 0 }],
        hess: derivatives.then(|| Matrix::zeros(k)),
    })
}

/// Log-likelihood `sum_n ln P_n(y_n)` at `beta`. Requires at least one
/// observation.
pub fn log_likelihood(design: &Design, beta: &[f64]) -> Result<f64> {
    check_len(beta, design.k)?;
    if design.n == 0 {
        return Err(Error::Underdetermined {
            n_used: 0,
            k: design.k,
        });
    }
    Ok(eval_chunks(design, beta, false).ll)
}

/// Analytic score vector: entry `(i, c)` is `sum_n (delta_in - P_in) x_in,c`.
pub fn gradient(design: &Design, beta: &[f64]) -> Result<Vec<f64>> {
    check_len(beta, design.k)?;
    Ok(eval_chunks(design, beta, true).grad)
}

/// Analytic Hessian of the log-likelihood; symmetric and negative
/// semidefinite everywhere because the log-likelihood is concave.
pub fn hessian(design: &Design, beta: &[f64]) -> Result<Matrix> {
    check_len(beta, design.k)?;
    Ok(eval_chunks(design, beta, true).hess.unwrap())
}

/// Log-likelihood, gradient and Hessian in one pass.
pub fn evaluate(design: &Design, beta: &[f64]) -> Result<LogitEval> {
    check_len(beta, design.k)?;
    if design.n == 0 {
        return Err(Error::Underdetermined {
            n_used: 0,
            k: design.k,
        });
    }
    let part = eval_chunks(design, beta, true);
    Ok(LogitEval {
        ll: part.ll,
        gradient: part.grad,
        hessian: part.hess.unwrap(),
    })
}
