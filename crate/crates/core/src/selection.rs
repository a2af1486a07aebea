//! AIC-guided stepwise model selection, procedures A and B.
//!
//! Procedure A starts from the model with every candidate included and
//! alternates a removal step and an addition step until neither changes the
//! model; procedure B starts from intercepts only and runs the addition step
//! first. Removal demands *both* an AIC decrease and statistical
//! insignificance of the removed coefficient; addition demands *either* an
//! AIC decrease *or* a significant added coefficient, with AIC-decreasing
//! candidates scanned first.
//!
//! AIC comparisons are only meaningful at a fixed sample size, so every
//! comparison is made on the complete-case sample of the larger variable set
//! involved: the pre-removal set for removals, the set including the
//! candidate for additions. After every few removals the sample is refreshed
//! (rows excluded for variables that have left the model come back) and AIC
//! comparisons restart on the new sample.
//!
//! The search ends with the "AIC optimal" model; a final pass then drops any
//! remaining insignificant coefficients one at a time, which yields the
//! reported final model. Every decision is logged in a replayable trace.
//!
//! Selection works at the granularity of a coefficient [`Term`] (variable x
//! non-base outcome), so in a three-outcome model a variable can survive in
//! one outcome's utility and be dropped from the other. Intercepts are not
//! terms and are never removed.

use crate::dataset::Dataset;
use crate::error::Error;
use crate::logit::{BlockSpec, ModelSpec, OutcomeLevel};
use crate::mle::{self, FitResult, OptimizerConfig};
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Akaike information criterion `-2 LL + 2 K`; lower is better.
pub fn aic(ll: f64, k: usize) -> f64 {
    -2.0 * ll + 2.0 * k as f64
}

/// One selectable coefficient: `variable` entering the utility of non-base
/// outcome `block`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub block: usize,
    pub variable: String,
}

impl Term {
    pub fn new(block: usize, variable: impl Into<String>) -> Self {
        Term {
            block,
            variable: variable.into(),
        }
    }
}

/// Which starting point the search uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Procedure {
    /// All candidates initially included.
    A,
    /// Intercepts only initially included.
    B,
}

/// Stepwise search settings.
#[derive(Debug, Clone)]
pub struct SelectionConfig {
    /// Two-tailed significance level for the t-tests (default 5%).
    pub level: f64,
    /// Removals between sample refreshes (default 4).
    pub refresh_cadence: usize,
    /// Cap on remove/add rounds before the search is declared non-converged.
    pub max_rounds: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            level: 0.05,
            refresh_cadence: 4,
            max_rounds: 200,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// Trace event. `Add`, `Remove` and `Finalize` change the model; `Refresh`
/// changes the sample; `Skip` records a candidate that could not be
/// evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionEvent {
    Add {
        term: Term,
        aic_before: f64,
        aic_after: f64,
        n_before: usize,
        n_after: usize,
        t_ratio: f64,
    },
    Remove {
        term: Term,
        aic_before: f64,
        aic_after: f64,
        n: usize,
        t_ratio: f64,
    },
    Refresh {
        n_before: usize,
        n_after: usize,
    },
    Finalize {
        term: Term,
        aic_before: f64,
        aic_after: f64,
        n_before: usize,
        n_after: usize,
        t_ratio: f64,
    },
    Skip {
        term: Term,
        reason: String,
    },
}

/// Ordered record of everything the search did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionTrace {
    pub events: Vec<SelectionEvent>,
}

impl SelectionTrace {
    /// Apply the model-changing events to an initial term set; the result
    /// must equal the final model's terms.
    pub fn replay(&self, initial: &[Term]) -> Vec<Term> {
        let mut set: Vec<Term> = initial.to_vec();
        for event in &self.events {
            match event {
                SelectionEvent::Add { term, .. } => {
                    if !set.contains(term) {
                        set.push(term.clone());
                    }
                }
                SelectionEvent::Remove { term, .. } | SelectionEvent::Finalize { term, .. } => {
                    set.retain(|t| t != term);
                }
                SelectionEvent::Refresh { .. } | SelectionEvent::Skip { .. } => {}
            }
        }
        set
    }
}

/// Live search state; [`step_remove`](SelectionState::step_remove) and
/// [`step_add`](SelectionState::step_add) can be driven directly, or through
/// [`run_procedure`].
pub struct SelectionState<'a> {
    base: &'a Dataset,
    outcome: String,
    levels: Vec<OutcomeLevel>,
    included: Vec<Term>,
    pool: Vec<Term>,
    forced: Vec<Term>,
    sample: Dataset,
    fit: FitResult,
    removals_since_refresh: usize,
    trace: SelectionTrace,
    cfg: SelectionConfig,
}

struct Snapshot {
    included: Vec<Term>,
    pool: Vec<Term>,
    sample: Dataset,
    fit: FitResult,
}

impl<'a> SelectionState<'a> {
    /// Build the starting state. `candidates` and `forced` are variable
    /// names; every variable contributes one term per non-base outcome.
    /// Forced terms are always in the model and never removable.
    pub fn start(
        procedure: Procedure,
        base: &'a Dataset,
        outcome: impl Into<String>,
        levels: Vec<OutcomeLevel>,
        candidates: &[String],
        forced: &[String],
        cfg: SelectionConfig,
    ) -> Result<Self> {
        let outcome = outcome.into();
        let n_blocks = levels.len().saturating_sub(1);
        if n_blocks == 0 {
            return Err(Error::InvalidSpec(
                "a model needs at least two outcome levels".into(),
            ));
        }
        for (i, c) in candidates.iter().enumerate() {
            base.schema().get(c)?;
            if candidates[..i].contains(c) {
                return Err(Error::DuplicateVariable { name: c.clone() });
            }
            if forced.contains(c) {
                return Err(Error::InvalidSpec(format!(
                    "variable `{c}` is both a candidate and forced"
                )));
            }
        }
        for f in forced {
            base.schema().get(f)?;
        }

        let mut terms: Vec<Term> = Vec::new();
        for var in candidates {
            for block in 0..n_blocks {
                terms.push(Term::new(block, var.clone()));
            }
        }
        let forced_terms: Vec<Term> = forced
            .iter()
            .flat_map(|var| (0..n_blocks).map(move |block| Term::new(block, var.clone())))
            .collect();

        let (included, pool) = match procedure {
            Procedure::A => (terms, Vec::new()),
            Procedure::B => (Vec::new(), terms),
        };

        let mut state = SelectionState {
            base,
            outcome,
            levels,
            included,
            pool,
            forced: forced_terms,
            sample: base.clone(),
            fit: FitResult {
                // placeholder, replaced by refresh below
                names: Vec::new(),
                beta: Vec::new(),
                ll: 0.0,
                ll_restricted: 0.0,
                rho2: 0.0,
                covariance: crate::linalg::Matrix::zeros(0),
                t_ratios: Vec::new(),
                aic: 0.0,
                n_used: 0,
                k: 0,
                converged: false,
                separation: false,
                iterations: Vec::new(),
            },
            removals_since_refresh: 0,
            trace: SelectionTrace::default(),
            cfg,
        };
        state.sort_canonical();
        state.resample()?;
        let fit = state.fit_on_sample(&state.included)?;
        if !fit.converged {
            return Err(Error::Separation {
                max_abs_beta: fit.beta.iter().fold(0.0f64, |a, &b| a.max(b.abs())),
            });
        }
        state.fit = fit;
        Ok(state)
    }

    fn schema_index(&self, var: &str) -> usize {
        self.base.schema().index_of(var).unwrap_or(usize::MAX)
    }

    fn sort_canonical(&mut self) {
        let key = |t: &Term, s: &Self| (s.schema_index(&t.variable), t.block);
        let mut inc = core::mem::take(&mut self.included);
        inc.sort_by_key(|t| key(t, self));
        self.included = inc;
        let mut pool = core::mem::take(&mut self.pool);
        pool.sort_by_key(|t| key(t, self));
        self.pool = pool;
    }

    /// Model spec for the forced terms plus `terms`.
    fn spec_for(&self, terms: &[Term]) -> ModelSpec {
        let n_blocks = self.levels.len() - 1;
        let mut blocks: Vec<BlockSpec> = (0..n_blocks)
            .map(|_| BlockSpec::with_intercept(Vec::new()))
            .collect();
        let mut all: Vec<&Term> = self.forced.iter().chain(terms.iter()).collect();
        all.sort_by_key(|t| (self.schema_index(&t.variable), t.block));
        for term in all {
            blocks[term.block].terms.push(term.variable.clone());
        }
        ModelSpec {
            outcome: self.outcome.clone(),
            levels: self.levels.clone(),
            blocks,
        }
    }

    fn variables_of(&self, terms: &[Term]) -> Vec<String> {
        let mut vars: Vec<String> = Vec::new();
        for t in self.forced.iter().chain(terms.iter()) {
            if !vars.contains(&t.variable) {
                vars.push(t.variable.clone());
            }
        }
        vars.push(self.outcome.clone());
        vars
    }

    /// Recompute the complete-case sample for the current variable set.
    fn resample(&mut self) -> Result<()> {
        let vars = self.variables_of(&self.included);
        self.sample = self.base.complete_cases(&vars)?.0;
        Ok(())
    }

    fn fit_on_sample(&self, terms: &[Term]) -> Result<FitResult> {
        mle::fit(&self.spec_for(terms), &self.sample, &self.cfg.optimizer)
    }

    fn t_of(&self, fit: &FitResult, term: &Term) -> f64 {
        fit.param_index(&self.levels[term.block].label, &term.variable)
            .map(|i| fit.t_ratios[i])
            .unwrap_or(f64::NAN)
    }

    pub fn included(&self) -> &[Term] {
        &self.included
    }

    pub fn pool(&self) -> &[Term] {
        &self.pool
    }

    pub fn fit(&self) -> &FitResult {
        &self.fit
    }

    pub fn sample_size(&self) -> usize {
        self.sample.n_rows()
    }

    pub fn trace(&self) -> &SelectionTrace {
        &self.trace
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            included: self.included.clone(),
            pool: self.pool.clone(),
            sample: self.sample.clone(),
            fit: self.fit.clone(),
        }
    }

    fn restore(&mut self, snap: Snapshot) {
        self.included = snap.included;
        self.pool = snap.pool;
        self.sample = snap.sample;
        self.fit = snap.fit;
    }

    /// Removal step: repeatedly drop the least significant term whose removal
    /// lowers the AIC on the fixed current sample, refreshing the sample
    /// after every `refresh_cadence` removals. Returns whether the model
    /// changed.
    pub fn step_remove(&mut self) -> Result<bool> {
        let crit = mle::critical_value(self.cfg.level);
        let mut changed = false;
        loop {
            // Insignificant terms ordered by |t| ascending; at equal |t| the
            // later variable in schema order goes first.
            let mut order: Vec<(f64, Term)> = self
                .included
                .iter()
                .map(|t| (self.t_of(&self.fit, t).abs(), t.clone()))
                .filter(|(a, _)| *a < crit)
                .collect();
            order.sort_by(|(ta, a), (tb, b)| {
                ta.partial_cmp(tb).unwrap().then_with(|| {
                    let ka = (self.schema_index(&a.variable), a.block);
                    let kb = (self.schema_index(&b.variable), b.block);
                    kb.cmp(&ka)
                })
            });

            let mut removed = false;
            for (t_abs, term) in order {
                let trial: Vec<Term> = self
                    .included
                    .iter()
                    .filter(|t| **t != term)
                    .cloned()
                    .collect();
                let trial_fit = match self.fit_on_sample(&trial) {
                    Ok(f) if f.converged => f,
                    Ok(f) => {
                        self.trace.events.push(SelectionEvent::Skip {
                            term: term.clone(),
                            reason: format!(
                                "refit without term did not converge (separation = {})",
                                f.separation
                            ),
                        });
                        continue;
                    }
                    Err(e) => {
                        self.trace.events.push(SelectionEvent::Skip {
                            term: term.clone(),
                            reason: e.to_string(),
                        });
                        continue;
                    }
                };
                if trial_fit.aic < self.fit.aic {
                    let signed_t = self.t_of(&self.fit, &term);
                    debug_assert!(t_abs < crit);
                    self.trace.events.push(SelectionEvent::Remove {
                        term: term.clone(),
                        aic_before: self.fit.aic,
                        aic_after: trial_fit.aic,
                        n: self.sample.n_rows(),
                        t_ratio: signed_t,
                    });
                    self.included = trial;
                    self.fit = trial_fit;
                    self.removals_since_refresh += 1;
                    removed = true;
                    changed = true;
                    if self.removals_since_refresh >= self.cfg.refresh_cadence {
                        self.refresh()?;
                    }
                    break;
                }
            }
            if !removed {
                return Ok(changed);
            }
        }
    }

    /// Bring back rows that were excluded only for variables no longer in
    /// the model, then refit. AIC values before and after a refresh are not
    /// comparable.
    fn refresh(&mut self) -> Result<()> {
        let n_before = self.sample.n_rows();
        self.resample()?;
        self.fit = self.fit_on_sample(&self.included)?;
        self.removals_since_refresh = 0;
        self.trace.events.push(SelectionEvent::Refresh {
            n_before,
            n_after: self.sample.n_rows(),
        });
        Ok(())
    }

    /// Refresh only if removals left the sample out of sync with the current
    /// variable set; reports whether anything changed.
    fn refresh_if_stale(&mut self) -> Result<bool> {
        let n_before = self.sample.n_rows();
        let vars = self.variables_of(&self.included);
        let fresh = self.base.complete_cases(&vars)?.0;
        if fresh.n_rows() == n_before {
            self.removals_since_refresh = 0;
            return Ok(false);
        }
        self.sample = fresh;
        self.fit = self.fit_on_sample(&self.included)?;
        self.removals_since_refresh = 0;
        self.trace.events.push(SelectionEvent::Refresh {
            n_before,
            n_after: self.sample.n_rows(),
        });
        Ok(true)
    }

    /// Addition step: candidates that lower the AIC (compared on the
    /// complete-case sample including the candidate) are taken first, best
    /// improvement wins; afterwards significant candidates are taken by
    /// largest |t|. Returns whether the model changed.
    pub fn step_add(&mut self) -> Result<bool> {
        let crit = mle::critical_value(self.cfg.level);
        let mut changed = false;
        loop {
            struct Candidate {
                term: Term,
                sample: Dataset,
                fit_with: FitResult,
                aic_without: f64,
                t_ratio: f64,
            }
            let mut evals: Vec<Candidate> = Vec::new();
            for term in self.pool.clone() {
                let mut trial = self.included.clone();
                trial.push(term.clone());
                let vars = self.variables_of(&trial);
                let sample = self.base.complete_cases(&vars)?.0;
                let spec_with = self.spec_for(&trial);
                let fit_with = match mle::fit(&spec_with, &sample, &self.cfg.optimizer) {
                    Ok(f) if f.converged => f,
                    Ok(f) => {
                        self.trace.events.push(SelectionEvent::Skip {
                            term: term.clone(),
                            reason: format!(
                                "fit with candidate did not converge (separation = {})",
                                f.separation
                            ),
                        });
                        continue;
                    }
                    Err(e) => {
                        self.trace.events.push(SelectionEvent::Skip {
                            term: term.clone(),
                            reason: e.to_string(),
                        });
                        continue;
                    }
                };
                // Reference model on the same (constant) sample.
                let fit_without =
                    match mle::fit(&self.spec_for(&self.included), &sample, &self.cfg.optimizer) {
                        Ok(f) => f,
                        Err(e) => {
                            self.trace.events.push(SelectionEvent::Skip {
                                term: term.clone(),
                                reason: e.to_string(),
                            });
                            continue;
                        }
                    };
                let t_ratio = self.t_of(&fit_with, &term);
                evals.push(Candidate {
                    term,
                    sample,
                    fit_with,
                    aic_without: fit_without.aic,
                    t_ratio,
                });
            }

            // AIC-decreasing candidates first: best improvement, then larger
            // usable sample, then schema order.
            let pick = {
                let mut best: Option<&Candidate> = None;
                for c in evals.iter().filter(|c| c.fit_with.aic < c.aic_without) {
                    best = Some(match best {
                        None => c,
                        Some(b) => {
                            let imp_c = c.aic_without - c.fit_with.aic;
                            let imp_b = b.aic_without - b.fit_with.aic;
                            if imp_c > imp_b
                                || (imp_c == imp_b && c.fit_with.n_used > b.fit_with.n_used)
                            {
                                c
                            } else {
                                b
                            }
                        }
                    });
                }
                if best.is_none() {
                    for c in evals.iter().filter(|c| c.t_ratio.abs() >= crit) {
                        best = Some(match best {
                            None => c,
                            Some(b) if c.t_ratio.abs() > b.t_ratio.abs() => c,
                            Some(b) => b,
                        });
                    }
                }
                best.map(|c| c.term.clone())
            };

            let Some(term) = pick else {
                return Ok(changed);
            };
            let chosen = evals.into_iter().find(|c| c.term == term).unwrap();
            self.trace.events.push(SelectionEvent::Add {
                term: chosen.term.clone(),
                aic_before: chosen.aic_without,
                aic_after: chosen.fit_with.aic,
                n_before: self.sample.n_rows(),
                n_after: chosen.fit_with.n_used,
                t_ratio: chosen.t_ratio,
            });
            self.pool.retain(|t| *t != chosen.term);
            self.included.push(chosen.term);
            self.sort_canonical();
            self.sample = chosen.sample;
            self.fit = chosen.fit_with;
            changed = true;
        }
    }

    /// Final pass: drop remaining insignificant terms one at a time (lowest
    /// |t| first), recomputing the sample and refitting after each drop.
    fn finalize(&mut self) -> Result<()> {
        let crit = mle::critical_value(self.cfg.level);
        loop {
            let worst = self
                .included
                .iter()
                .map(|t| (self.t_of(&self.fit, t).abs(), t.clone()))
                .filter(|(a, _)| *a < crit)
                .min_by(|(ta, a), (tb, b)| {
                    ta.partial_cmp(tb).unwrap().then_with(|| {
                        let ka = (self.schema_index(&a.variable), a.block);
                        let kb = (self.schema_index(&b.variable), b.block);
                        kb.cmp(&ka)
                    })
                });
            let Some((_, term)) = worst else {
                return Ok(());
            };
            let t_ratio = self.t_of(&self.fit, &term);
            let aic_before = self.fit.aic;
            let n_before = self.sample.n_rows();
            self.included.retain(|t| *t != term);
            self.resample()?;
            self.fit = self.fit_on_sample(&self.included)?;
            self.trace.events.push(SelectionEvent::Finalize {
                term,
                aic_before,
                aic_after: self.fit.aic,
                n_before,
                n_after: self.sample.n_rows(),
                t_ratio,
            });
        }
    }
}

/// Outcome of a full stepwise run.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub procedure: Procedure,
    /// Model at the remove/add fixed point.
    pub aic_optimal: FitResult,
    pub aic_optimal_terms: Vec<Term>,
    /// Model after the final insignificance pass.
    pub final_fit: FitResult,
    pub final_terms: Vec<Term>,
    pub trace: SelectionTrace,
    /// False when the search hit the round cap or revisited a state and was
    /// stopped at the best AIC seen.
    pub search_converged: bool,
    outcome: String,
    levels: Vec<OutcomeLevel>,
    forced: Vec<Term>,
}

impl SelectionResult {
    fn spec_of(&self, terms: &[Term]) -> ModelSpec {
        let n_blocks = self.levels.len() - 1;
        let mut blocks: Vec<BlockSpec> = (0..n_blocks)
            .map(|_| BlockSpec::with_intercept(Vec::new()))
            .collect();
        for term in self.forced.iter().chain(terms.iter()) {
            if !blocks[term.block].terms.contains(&term.variable) {
                blocks[term.block].terms.push(term.variable.clone());
            }
        }
        ModelSpec {
            outcome: self.outcome.clone(),
            levels: self.levels.clone(),
            blocks,
        }
    }

    /// Spec of the final model (forced terms included).
    pub fn final_spec(&self) -> ModelSpec {
        self.spec_of(&self.final_terms)
    }

    /// Spec of the AIC-optimal model.
    pub fn aic_optimal_spec(&self) -> ModelSpec {
        self.spec_of(&self.aic_optimal_terms)
    }

    /// Test-add `variable` into the AIC-optimal model and report the
    /// coefficient and t-ratio it would get in every outcome it is missing
    /// from. The variable is never retained; published tables show these
    /// probes in brackets.
    pub fn probe_variable(
        &self,
        base: &Dataset,
        variable: &str,
        optimizer: &OptimizerConfig,
    ) -> Result<Vec<ProbeCell>> {
        base.schema().get(variable)?;
        let n_blocks = self.levels.len() - 1;
        let missing: Vec<Term> = (0..n_blocks)
            .map(|b| Term::new(b, variable))
            .filter(|t| {
                !self.aic_optimal_terms.contains(t) && !self.forced.contains(t)
            })
            .collect();
        if missing.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "variable `{variable}` is already in the AIC-optimal model"
            )));
        }
        let mut terms = self.aic_optimal_terms.clone();
        terms.extend(missing.iter().cloned());
        let spec = self.spec_of(&terms);
        let mut vars = spec.explanatory_variables();
        vars.push(spec.outcome.clone());
        let (sample, _) = base.complete_cases(&vars)?;
        let fit = mle::fit(&spec, &sample, optimizer)?;
        Ok(missing
            .into_iter()
            .map(|term| {
                let outcome = self.levels[term.block].label.clone();
                let idx = fit.param_index(&outcome, &term.variable).unwrap();
                ProbeCell {
                    outcome,
                    term,
                    coefficient: fit.beta[idx],
                    t_ratio: fit.t_ratios[idx],
                }
            })
            .collect())
    }
}

/// One probed coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCell {
    pub term: Term,
    pub outcome: String,
    pub coefficient: f64,
    pub t_ratio: f64,
}

/// Run a full stepwise search. For procedure A the initial all-variable fit
/// must be estimable; on failure the error is returned so the caller can
/// fall back to procedure B.
pub fn run_procedure(
    procedure: Procedure,
    base: &Dataset,
    outcome: &str,
    levels: Vec<OutcomeLevel>,
    candidates: &[String],
    forced: &[String],
    cfg: &SelectionConfig,
) -> Result<SelectionResult> {
    let mut state = SelectionState::start(
        procedure,
        base,
        outcome,
        levels.clone(),
        candidates,
        forced,
        cfg.clone(),
    )?;

    if procedure == Procedure::B {
        state.step_add()?;
    }

    let mut visited: Vec<(Vec<Term>, usize)> = Vec::new();
    let mut best: Option<Snapshot> = None;
    let mut search_converged = true;
    for round in 0.. {
        let signature = (state.included.clone(), state.sample.n_rows());
        if visited.contains(&signature) || round >= cfg.max_rounds {
            search_converged = false;
            break;
        }
        visited.push(signature);
        if best
            .as_ref()
            .is_none_or(|b| state.fit.aic < b.fit.aic)
        {
            best = Some(state.snapshot());
        }
        let removed = state.step_remove()?;
        let added = state.step_add()?;
        if !removed && !added {
            // Joint fixed point of the steps; make sure the sample is in
            // sync with the surviving variables (removals between refreshes
            // leave it stale) and give the steps one more chance when rows
            // came back.
            if state.refresh_if_stale()? {
                continue;
            }
            break;
        }
    }
    if search_converged {
        // The fixed point is at least as good as anything seen earlier on
        // its own sample; keep it.
        best = Some(state.snapshot());
    }
    state.restore(best.expect("at least one state visited"));

    let aic_optimal = state.fit.clone();
    let aic_optimal_terms = state.included.clone();
    state.finalize()?;

    Ok(SelectionResult {
        procedure,
        aic_optimal,
        aic_optimal_terms,
        final_fit: state.fit.clone(),
        final_terms: state.included.clone(),
        trace: state.trace.clone(),
        search_converged,
        outcome: state.outcome.clone(),
        levels,
        forced: state.forced.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Schema, VariableSpec};
    use crate::num;
    use alloc::vec;

    #[test]
    fn aic_formula() {
        assert_eq!(aic(-100.0, 5), 210.0);
        assert_eq!(aic(0.0, 0), 0.0);
        // A variable that raises the LL by exactly one leaves the AIC
        // unchanged.
        assert_eq!(aic(-99.0, 6), aic(-100.0, 5));
    }

    /// Binary data with three covariates: strong signal, borderline signal
    /// tuned below the significance cutoff, and pure noise.
    fn planted(seed: u64, n: usize, beta_mid: f64) -> (Dataset, Vec<String>) {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let schema = Schema::new(vec![
            VariableSpec::indicator("y"),
            VariableSpec::quantitative("strong"),
            VariableSpec::quantitative("mid"),
            VariableSpec::quantitative("noise"),
        ])
        .unwrap();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); 4];
        for _ in 0..n {
            let xs = rng.next_normal();
            let xm = rng.next_normal();
            let xn = rng.next_normal();
            let u = -0.3 + 0.9 * xs + beta_mid * xm;
            let p = 1.0 / (1.0 + num::exp(-u));
            cols[0].push(Some((rng.next_f64() < p) as u8 as f64));
            cols[1].push(Some(xs));
            cols[2].push(Some(xm));
            cols[3].push(Some(xn));
        }
        let ds = Dataset::from_columns(schema, cols, "planted").unwrap();
        (ds, vec!["strong".into(), "mid".into(), "noise".into()])
    }

    fn binary_levels() -> Vec<OutcomeLevel> {
        vec![OutcomeLevel::new("one", 1.0), OutcomeLevel::new("zero", 0.0)]
    }

    /// Effect size and seed picked so the fitted |t| of `mid` lands between
    /// sqrt(2) and the 1.96 cutoff (checked by an assertion below).
    const MID_SEED: u64 = 5;
    const MID_BETA: f64 = 0.058;

    #[test]
    fn removal_requires_both_aic_decrease_and_insignificance() {
        // `mid` is insignificant, but removing it would *raise* the AIC, so
        // the conjunction must keep it. The noise term must go.
        let (ds, candidates) = planted(MID_SEED, 4000, MID_BETA);
        let mut state = SelectionState::start(
            Procedure::A,
            &ds,
            "y",
            binary_levels(),
            &candidates,
            &[],
            SelectionConfig::default(),
        )
        .unwrap();
        let t_mid = state.t_of(&state.fit, &Term::new(0, "mid")).abs();
        assert!(
            t_mid > num::sqrt(2.0) && t_mid < 1.959964,
            "seed landed t_mid = {t_mid}, outside the band this test needs"
        );
        state.step_remove().unwrap();
        let included = state.included().to_vec();
        assert!(included.contains(&Term::new(0, "strong")));
        assert!(included.contains(&Term::new(0, "mid")), "conjunction violated");
        assert!(!included.contains(&Term::new(0, "noise")));
        // Every executed removal lowered the AIC on its fixed sample.
        for e in &state.trace().events {
            if let SelectionEvent::Remove {
                aic_before,
                aic_after,
                t_ratio,
                ..
            } = e
            {
                assert!(aic_after < aic_before);
                assert!(t_ratio.abs() < 1.959964);
            }
        }
    }

    #[test]
    fn addition_takes_either_condition() {
        // Same construction, driven from the empty model: `strong` enters
        // (both conditions), `mid` enters through the AIC branch alone
        // (insignificant but AIC-decreasing), `noise` stays out.
        let (ds, candidates) = planted(MID_SEED, 4000, MID_BETA);
        let mut state = SelectionState::start(
            Procedure::B,
            &ds,
            "y",
            binary_levels(),
            &candidates,
            &[],
            SelectionConfig::default(),
        )
        .unwrap();
        state.step_add().unwrap();
        let included = state.included().to_vec();
        assert!(included.contains(&Term::new(0, "strong")));
        assert!(included.contains(&Term::new(0, "mid")));
        assert!(!included.contains(&Term::new(0, "noise")));
        let mid_add = state.trace().events.iter().find_map(|e| match e {
            SelectionEvent::Add {
                term,
                aic_before,
                aic_after,
                t_ratio,
                ..
            } if term.variable == "mid" => Some((*aic_before, *aic_after, *t_ratio)),
            _ => None,
        });
        let (before, after, t) = mid_add.expect("mid was added");
        assert!(after < before, "mid entered through the AIC condition");
        assert!(t.abs() < 1.959964, "mid is insignificant at 5%");
        // Fixed point: another pass changes nothing.
        assert!(!state.step_add().unwrap());
    }

    #[test]
    fn zero_candidates_give_intercept_only_final_model() {
        let (ds, _) = planted(7, 500, 0.0);
        let result = run_procedure(
            Procedure::A,
            &ds,
            "y",
            binary_levels(),
            &[],
            &[],
            &SelectionConfig::default(),
        )
        .unwrap();
        assert!(result.final_terms.is_empty());
        assert_eq!(result.final_fit.k, 1);
        assert!(result.search_converged);
    }

    #[test]
    fn procedures_agree_on_clean_planted_data() {
        let (ds, candidates) = planted(99, 3000, 0.0);
        let cfg = SelectionConfig::default();
        let a = run_procedure(
            Procedure::A,
            &ds,
            "y",
            binary_levels(),
            &candidates,
            &[],
            &cfg,
        )
        .unwrap();
        let b = run_procedure(
            Procedure::B,
            &ds,
            "y",
            binary_levels(),
            &candidates,
            &[],
            &cfg,
        )
        .unwrap();
        assert_eq!(a.final_terms, b.final_terms);
        assert!(a.final_terms.contains(&Term::new(0, "strong")));
        // The final model carries no insignificant coefficient.
        let crit = mle::critical_value(0.05);
        for term in &a.final_terms {
            let idx = a.final_fit.param_index("one", &term.variable).unwrap();
            assert!(a.final_fit.t_ratios[idx].abs() >= crit);
        }
    }

    #[test]
    fn procedure_a_fails_on_underdetermined_initial_fit() {
        let candidates: Vec<String> = vec!["strong".into(), "mid".into(), "noise".into()];
        // Two rows cannot identify the full model's four coefficients.
        let tiny = Dataset::from_columns(
            Schema::new(vec![
                VariableSpec::indicator("y"),
                VariableSpec::quantitative("strong"),
                VariableSpec::quantitative("mid"),
                VariableSpec::quantitative("noise"),
            ])
            .unwrap(),
            vec![
                vec![Some(1.0), Some(0.0)],
                vec![Some(0.4), Some(-0.4)],
                vec![Some(0.1), Some(0.2)],
                vec![Some(-0.3), Some(0.6)],
            ],
            "tiny",
        )
        .unwrap();
        let err = run_procedure(
            Procedure::A,
            &tiny,
            "y",
            binary_levels(),
            &candidates,
            &[],
            &SelectionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Underdetermined { .. }));
    }

    #[test]
    fn trace_replays_to_final_terms() {
        let (ds, candidates) = planted(11, 2500, 0.02);
        for procedure in [Procedure::A, Procedure::B] {
            let result = run_procedure(
                procedure,
                &ds,
                "y",
                binary_levels(),
                &candidates,
                &[],
                &SelectionConfig::default(),
            )
            .unwrap();
            let initial: Vec<Term> = match procedure {
                Procedure::A => candidates.iter().map(|v| Term::new(0, v.clone())).collect(),
                Procedure::B => Vec::new(),
            };
            let mut replayed = result.trace.replay(&initial);
            let key = |t: &Term| (ds.schema().index_of(&t.variable).unwrap(), t.block);
            replayed.sort_by_key(key);
            let mut finals = result.final_terms.clone();
            finals.sort_by_key(key);
            assert_eq!(replayed, finals, "procedure {procedure:?}");
        }
    }

    #[test]
    fn probe_of_included_variable_is_an_error() {
        let (ds, candidates) = planted(5, 3000, 0.0);
        let result = run_procedure(
            Procedure::A,
            &ds,
            "y",
            binary_levels(),
            &candidates,
            &[],
            &SelectionConfig::default(),
        )
        .unwrap();
        assert!(result.aic_optimal_terms.contains(&Term::new(0, "strong")));
        assert!(result
            .probe_variable(&ds, "strong", &OptimizerConfig::default())
            .is_err());
        // Probing a variable outside the model returns its bracketed cell.
        if !result.aic_optimal_terms.contains(&Term::new(0, "noise")) {
            let cells = result
                .probe_variable(&ds, "noise", &OptimizerConfig::default())
                .unwrap();
            assert_eq!(cells.len(), 1);
            assert!(cells[0].t_ratio.is_finite());
        }
    }

    #[test]
    fn forced_variables_survive_even_when_insignificant() {
        let (ds, _) = planted(13, 2000, 0.0);
        let result = run_procedure(
            Procedure::A,
            &ds,
            "y",
            binary_levels(),
            &["strong".to_string()],
            &["noise".to_string()],
            &SelectionConfig::default(),
        )
        .unwrap();
        // `noise` has a coefficient in the final fit although it is junk.
        assert!(result.final_fit.param_index("one", "noise").is_some());
    }
}
