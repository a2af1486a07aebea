//! Maximum-likelihood fitting.
//!
//! Newton-Raphson with the analytic gradient and Hessian, backtracking step
//! halving (the log-likelihood trace is non-decreasing up to floating-point
//! resolution), a ridge fallback for numerically singular Hessians and rank
//! detection for structurally collinear designs. The objective is concave, so
//! the iteration starts from zero and any stationary point is the global
//! maximum.

use crate::dataset::Dataset;
use crate::error::Error;
use crate::inference;
use crate::linalg::Matrix;
use crate::logit::{self, Design, ModelSpec, ParamName};
use crate::num;
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;

/// Newton-Raphson settings.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Convergence test on the gradient infinity norm.
    pub gradient_tolerance: f64,
    pub step_halving_limit: u32,
    /// Bound on the coefficient infinity norm beyond which quasi-complete
    /// separation is assumed.
    pub divergence_bound: f64,
    /// Diagonal ridge added when the Hessian cannot be factorized.
    pub ridge: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            step_halving_limit: 30,
            divergence_bound: 50.0,
            ridge: 1e-8,
        }
    }
}

/// One Newton iteration as recorded in the diagnostics trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub ll: f64,
    pub gradient_norm: f64,
    /// Accepted fraction of the full Newton step (0 for the initial point).
    pub step_scale: f64,
}

/// Everything a fitted model reports.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub names: Vec<ParamName>,
    pub beta: Vec<f64>,
    pub ll: f64,
    /// Log-likelihood of the intercepts-only model on the same sample.
    pub ll_restricted: f64,
    /// McFadden rho-squared, `1 - ll / ll_restricted`.
    pub rho2: f64,
    /// Inverse of the negative Hessian at the optimum.
    pub covariance: Matrix,
    pub t_ratios: Vec<f64>,
    pub aic: f64,
    pub n_used: usize,
    pub k: usize,
    pub converged: bool,
    /// Set when the coefficient norm crossed the divergence bound while the
    /// gradient had not vanished; the best iterate is returned.
    pub separation: bool,
    pub iterations: Vec<IterationRecord>,
}

impl FitResult {
    /// Coefficient index by (outcome label, term name).
    pub fn param_index(&self, outcome: &str, term: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|p| p.outcome == outcome && p.term == term)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

struct NewtonOutcome {
    beta: Vec<f64>,
    ll: f64,
    hessian: Matrix,
    converged: bool,
    separation: bool,
    trace: Vec<IterationRecord>,
}

/// Factor `-H`, telling structural rank deficiency (collinear columns,
/// reported by name) apart from a numerically indefinite matrix (handled
/// with an escalating ridge).
fn factor_neg_hessian(
    hessian: &Matrix,
    names: &[ParamName],
    ridge: f64,
) -> Result<crate::linalg::Cholesky> {
    let k = hessian.order();
    let mut a = hessian.clone();
    a.scale(-1.0);
    if let Ok(c) = a.cholesky() {
        return Ok(c);
    }
    let (rank, perm) = a.pivoted_rank(1e-12);
    if rank < k {
        let columns = perm[rank..]
            .iter()
            .map(|&i| alloc::format!("{}:{}", names[i].outcome, names[i].term))
            .collect();
        return Err(Error::Collinear { columns });
    }
    let mut eps = ridge;
    while eps <= 1.0 {
        let mut aa = a.clone();
        for i in 0..k {
            aa.add_to(i, i, eps);
        }
        if let Ok(c) = aa.cholesky() {
            return Ok(c);
        }
        eps *= 10.0;
    }
    Err(Error::Collinear {
        columns: names
            .iter()
            .map(|p| alloc::format!("{}:{}", p.outcome, p.term))
            .collect(),
    })
}

fn newton_maximize(design: &Design, cfg: &OptimizerConfig) -> Result<NewtonOutcome> {
    let k = design.k();
    let mut beta = vec![0.0; k];
    let mut eval = logit::evaluate(design, &beta)?;
    let mut trace = vec![IterationRecord {
        iteration: 0,
        ll: eval.ll,
        gradient_norm: inf_norm(&eval.gradient),
        step_scale: 0.0,
    }];
    let mut converged = inf_norm(&eval.gradient) <= cfg.gradient_tolerance;
    let mut separation = false;

    let mut iteration = 0;
    while !converged && !separation && iteration < cfg.max_iterations {
        iteration += 1;
        let chol = factor_neg_hessian(&eval.hessian, design.names(), cfg.ridge)?;
        let delta = chol.solve(&eval.gradient);

        // Predicted quadratic improvement of the full Newton step. Once it
        // falls below the floating-point resolution of the LL, the ascent
        // test becomes rounding noise; the pure Newton step is taken
        // unchecked there (the objective is concave, so it is contractive).
        let predicted: f64 = 0.5
            * eval
                .gradient
                .iter()
                .zip(delta.iter())
                .map(|(g, d)| g * d)
                .sum::<f64>();
        let resolution = 16.0 * f64::EPSILON * (1.0 + eval.ll.abs());

        let mut scale = 1.0f64;
        let mut accepted: Option<Vec<f64>> = None;
        for _ in 0..=cfg.step_halving_limit {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(delta.iter())
                .map(|(b, d)| b + scale * d)
                .collect();
            if predicted <= resolution {
                accepted = Some(candidate);
                break;
            }
            let ll = logit::log_likelihood(design, &candidate)?;
            if ll >= eval.ll {
                accepted = Some(candidate);
                break;
            }
            scale *= 0.5;
        }
        let Some(next_beta) = accepted else {
            // Every backtracked step lowered the LL; we are at the numerical
            // optimum.
            break;
        };
        beta = next_beta;
        eval = logit::evaluate(design, &beta)?;
        trace.push(IterationRecord {
            iteration,
            ll: eval.ll,
            gradient_norm: inf_norm(&eval.gradient),
            step_scale: scale,
        });
        converged = inf_norm(&eval.gradient) <= cfg.gradient_tolerance;
        if !converged && inf_norm(&beta) > cfg.divergence_bound {
            separation = true;
        }
    }

    Ok(NewtonOutcome {
        beta,
        ll: eval.ll,
        hessian: eval.hessian,
        converged,
        separation,
        trace,
    })
}

fn assemble(
    design: &Design,
    outcome: NewtonOutcome,
    ll_restricted: f64,
    cfg: &OptimizerConfig,
) -> Result<FitResult> {
    let k = design.k();
    let covariance = factor_neg_hessian(&outcome.hessian, design.names(), cfg.ridge)?.inverse();
    let t_ratios = outcome
        .beta
        .iter()
        .enumerate()
        .map(|(i, b)| b / num::sqrt(covariance.get(i, i)))
        .collect();
    let aic = -2.0 * outcome.ll + 2.0 * k as f64;
    Ok(FitResult {
        names: design.names().to_vec(),
        beta: outcome.beta,
        ll: outcome.ll,
        ll_restricted,
        rho2: 1.0 - outcome.ll / ll_restricted,
        covariance,
        t_ratios,
        aic,
        n_used: design.n_rows(),
        k,
        converged: outcome.converged,
        separation: outcome.separation,
        iterations: outcome.trace,
    })
}

fn precheck(design: &Design, spec: &ModelSpec) -> Result<()> {
    if design.n_rows() <= design.k() {
        return Err(Error::Underdetermined {
            n_used: design.n_rows(),
            k: design.k(),
        });
    }
    for (count, level) in design.outcome_counts().iter().zip(spec.levels.iter()) {
        if *count == 0 {
            return Err(Error::DegenerateOutcome {
                outcome: level.label.clone(),
            });
        }
    }
    Ok(())
}

/// Fit `spec` on the complete-case sample of `ds` by maximum likelihood.
pub fn fit(spec: &ModelSpec, ds: &Dataset, cfg: &OptimizerConfig) -> Result<FitResult> {
    let design = Design::build(spec, ds)?;
    fit_design(spec, &design, cfg)
}

/// Fit an already materialized design (used by the stepwise search, which
/// reuses one sample across many candidate models).
pub fn fit_design(spec: &ModelSpec, design: &Design, cfg: &OptimizerConfig) -> Result<FitResult> {
    precheck(design, spec)?;
    let outcome = newton_maximize(design, cfg)?;

    let restricted_spec = spec.intercept_only();
    let all_constant = design.names().iter().all(|p| p.term == logit::CONSTANT);
    let ll_restricted = if all_constant && restricted_spec.blocks == spec.blocks {
        outcome.ll
    } else {
        let rdesign = design.intercepts_only();
        newton_maximize(&rdesign, cfg)?.ll
    };
    assemble(design, outcome, ll_restricted, cfg)
}

/// Intercepts-only fit on the same complete-case sample `fit` would use;
/// its log-likelihood is the restricted LL behind rho-squared.
pub fn restricted_fit(spec: &ModelSpec, ds: &Dataset, cfg: &OptimizerConfig) -> Result<FitResult> {
    let full_design = Design::build(spec, ds)?;
    precheck(&full_design, spec)?;
    let rdesign = full_design.intercepts_only();
    let outcome = newton_maximize(&rdesign, cfg)?;
    let ll = outcome.ll;
    assemble(&rdesign, outcome, ll, cfg)
}

/// McFadden rho-squared `1 - ll / ll_restricted` with consistency checks.
pub fn mcfadden_rho2(ll: f64, ll_restricted: f64) -> Result<f64> {
    if ll > 0.0 {
        return Err(Error::Inconsistent(alloc::format!(
            "log-likelihood {ll} is positive"
        )));
    }
    if ll_restricted >= 0.0 {
        return Err(Error::Inconsistent(alloc::format!(
            "restricted log-likelihood {ll_restricted} is not negative"
        )));
    }
    if ll < ll_restricted - 1e-9 * ll_restricted.abs() {
        return Err(Error::Inconsistent(alloc::format!(
            "log-likelihood {ll} is below its restricted value {ll_restricted}"
        )));
    }
    Ok(1.0 - ll / ll_restricted)
}

/// Two-tailed critical value for a coefficient t-ratio at the given
/// significance level, under the large-sample normal approximation
/// (1.959964 at 5%). Solved from the chi-squared tail with one degree of
/// freedom by bisection.
pub fn critical_value(level: f64) -> f64 {
    assert!(level > 0.0 && level < 1.0, "level must be in (0, 1)");
    let (mut lo, mut hi) = (0.0f64, 400.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inference::chi_squared_sf(mid, 1) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    num::sqrt(0.5 * (lo + hi))
}

/// Per-coefficient significance flags: `|t| >= critical_value(level)`.
pub fn significance(fit: &FitResult, level: f64) -> Vec<bool> {
    let crit = critical_value(level);
    fit.t_ratios.iter().map(|t| t.abs() >= crit).collect()
}

/// Dedicated binary-logit route (`P_1 = exp(u)/(exp(u)+1)`), kept separate
/// from the multinomial machinery so the two can check each other.
pub fn fit_binary(spec: &ModelSpec, ds: &Dataset, cfg: &OptimizerConfig) -> Result<FitResult> {
    if spec.n_outcomes() != 2 {
        return Err(Error::InvalidSpec(
            "the binary route needs exactly two outcomes".into(),
        ));
    }
    let design = Design::build(spec, ds)?;
    precheck(&design, spec)?;

    let n = design.n_rows();
    let k = design.k();
    // Gather the single block into plain row-major storage.
    let mut x = Vec::with_capacity(n * k);
    for r in 0..n {
        for c in 0..k {
            x.push(design.x_value(0, r, c));
        }
    }
    let y: Vec<f64> = (0..n)
        .map(|r| (design.outcome_index(r) == 0) as u8 as f64)
        .collect();

    let softplus = |u: f64| u.max(0.0) + num::ln_1p(num::exp(-u.abs()));
    let eval = |beta: &[f64]| -> (f64, Vec<f64>, Matrix) {
        let mut ll_terms = Vec::with_capacity(n);
        let mut grad = vec![0.0; k];
        let mut hess = Matrix::zeros(k);
        for r in 0..n {
            let row = &x[r * k..(r + 1) * k];
            let mut u = 0.0;
            for (xi, bi) in row.iter().zip(beta.iter()) {
                u += xi * bi;
            }
            ll_terms.push(if y[r] == 1.0 { -softplus(-u) } else { -softplus(u) });
            let p = 1.0 / (1.0 + num::exp(-u));
            let resid = y[r] - p;
            let w = p * (1.0 - p);
            for (c1, &x1) in row.iter().enumerate() {
                grad[c1] += resid * x1;
                for (c2, &x2) in row.iter().enumerate() {
                    hess.add_to(c1, c2, -(w * x1 * x2));
                }
            }
        }
        (num::sum_pairwise(&ll_terms), grad, hess)
    };

    let mut beta = vec![0.0; k];
    let (mut ll, mut grad, mut hess) = eval(&beta);
    let mut trace = vec![IterationRecord {
        iteration: 0,
        ll,
        gradient_norm: inf_norm(&grad),
        step_scale: 0.0,
    }];
    let mut converged = inf_norm(&grad) <= cfg.gradient_tolerance;
    let mut separation = false;
    let mut iteration = 0;
    while !converged && !separation && iteration < cfg.max_iterations {
        iteration += 1;
        let chol = factor_neg_hessian(&hess, design.names(), cfg.ridge)?;
        let delta = chol.solve(&grad);
        let predicted: f64 = 0.5
            * grad
                .iter()
                .zip(delta.iter())
                .map(|(g, d)| g * d)
                .sum::<f64>();
        let resolution = 16.0 * f64::EPSILON * (1.0 + ll.abs());
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.step_halving_limit {
            let cand: Vec<f64> = beta
                .iter()
                .zip(delta.iter())
                .map(|(b, d)| b + scale * d)
                .collect();
            let (cll, cgrad, chess) = eval(&cand);
            if cll >= ll || predicted <= resolution {
                accepted = Some((cand, cll, cgrad, chess));
                break;
            }
            scale *= 0.5;
        }
        let Some((nb, nll, ngrad, nhess)) = accepted else {
            break;
        };
        beta = nb;
        ll = nll;
        grad = ngrad;
        hess = nhess;
        trace.push(IterationRecord {
            iteration,
            ll,
            gradient_norm: inf_norm(&grad),
            step_scale: scale,
        });
        converged = inf_norm(&grad) <= cfg.gradient_tolerance;
        if !converged && inf_norm(&beta) > cfg.divergence_bound {
            separation = true;
        }
    }

    let rdesign = design.intercepts_only();
    let ll_restricted = newton_maximize(&rdesign, cfg)?.ll;
    assemble(
        &design,
        NewtonOutcome {
            beta,
            ll,
            hessian: hess,
            converged,
            separation,
            trace,
        },
        ll_restricted,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Schema, VariableSpec};
    use crate::logit::OutcomeLevel;

    /// Dataset of a lone categorical outcome with the given level counts
    /// (levels coded 0, 1, ..., base last).
    fn counts_dataset(counts: &[usize]) -> (Dataset, ModelSpec) {
        let i = counts.len();
        let levels: Vec<(f64, alloc::string::String)> = (0..i)
            .map(|l| (l as f64, alloc::format!("level{l}")))
            .collect();
        let schema = Schema::new(vec![VariableSpec::categorical("y", levels.clone())]).unwrap();
        let mut col = Vec::new();
        for (l, &c) in counts.iter().enumerate() {
            col.extend(core::iter::repeat_n(Some(l as f64), c));
        }
        let ds = Dataset::from_columns(schema, vec![col], "counts").unwrap();
        let spec = ModelSpec::shared(
            "y",
            (0..i).map(|l| OutcomeLevel::new(alloc::format!("level{l}"), l as f64)).collect(),
            vec![],
        );
        (ds, spec)
    }

    /// Closed-form oracle for intercept-only models: beta = ln(n_i / n_base),
    /// restricted LL = sum_i n_i ln(n_i / N).
    fn log_share_beta(counts: &[usize]) -> Vec<f64> {
        let base = *counts.last().unwrap() as f64;
        counts[..counts.len() - 1]
            .iter()
            .map(|&c| num::ln(c as f64 / base))
            .collect()
    }

    fn log_share_ll(counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        counts
            .iter()
            .map(|&c| c as f64 * num::ln(c as f64 / n as f64))
            .sum()
    }

    #[test]
    fn intercept_only_binary_matches_log_share() {
        let (ds, spec) = counts_dataset(&[30, 70]);
        let fit = fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.beta[0] - num::ln(30.0 / 70.0)).abs() < 1e-8);
        // Fitted probability of outcome 0 equals the sample share.
        let design = Design::build(&spec, &ds).unwrap();
        let p = design.probabilities(&fit.beta, 0).unwrap();
        assert!((p[0] - 0.30).abs() < 1e-10);
        assert!((p[1] - 0.70).abs() < 1e-10);
    }

    #[test]
    fn intercept_only_trinary_matches_log_share() {
        let (ds, spec) = counts_dataset(&[20, 30, 50]);
        let fit = fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        let want = log_share_beta(&[20, 30, 50]);
        assert!((fit.beta[0] - want[0]).abs() < 1e-8, "{}", fit.beta[0]);
        assert!((fit.beta[1] - want[1]).abs() < 1e-8, "{}", fit.beta[1]);
        assert!((fit.ll - log_share_ll(&[20, 30, 50])).abs() < 1e-8);
    }

    #[test]
    fn restricted_fit_matches_closed_form_on_paper_counts() {
        // 518 unsafe-speed observations against 4680 others.
        let (ds, spec) = counts_dataset(&[518, 4680]);
        let fit = restricted_fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        let want = log_share_ll(&[518, 4680]);
        assert!((fit.ll_restricted - want).abs() < 1e-8);
        assert!((fit.ll - want).abs() < 1e-8);
        assert!(fit.rho2.abs() < 1e-12);
    }

    #[test]
    fn restricted_fit_uniform_counts() {
        let m = 250;
        let (ds, spec) = counts_dataset(&[m, m]);
        let fit = restricted_fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        let want = -2.0 * m as f64 * num::ln(2.0);
        assert!((fit.ll_restricted - want).abs() < 1e-9);
    }

    #[test]
    fn degenerate_outcome_is_an_error() {
        let (ds, spec) = counts_dataset(&[40, 0, 60]);
        let err = fit(&spec, &ds, &OptimizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateOutcome { .. }));
    }

    #[test]
    fn underdetermined_sample_is_an_error() {
        let (ds, spec) = counts_dataset(&[1, 1]);
        // k = 1, n = 2 passes; shrink to n = 1 by making base empty instead.
        assert!(fit(&spec, &ds, &OptimizerConfig::default()).is_ok());
        let (empty, spec2) = counts_dataset(&[0, 0]);
        assert!(matches!(
            fit(&spec2, &empty, &OptimizerConfig::default()),
            Err(Error::Underdetermined { .. })
        ));
    }

    #[test]
    fn gradient_vanishes_at_intercept_only_mle() {
        let (ds, spec) = counts_dataset(&[37, 63]);
        let fit = fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        let design = Design::build(&spec, &ds).unwrap();
        let g = logit::gradient(&design, &fit.beta).unwrap();
        assert!(g[0].abs() <= 1e-8);
    }

    #[test]
    fn rho2_fixtures() {
        assert!((mcfadden_rho2(-4468.1, -5203.8).unwrap() - 0.141).abs() < 5e-4);
        assert!((mcfadden_rho2(-87.04, -113.95).unwrap() - 0.236).abs() < 5e-4);
        assert_eq!(mcfadden_rho2(-100.0, -100.0).unwrap(), 0.0);
    }

    #[test]
    fn rho2_consistency_errors() {
        assert!(mcfadden_rho2(1.0, -10.0).is_err());
        assert!(mcfadden_rho2(-11.0, -10.0).is_err());
        assert!(mcfadden_rho2(-5.0, 0.0).is_err());
    }

    #[test]
    fn significance_flags_on_paper_t_ratios() {
        let crit = critical_value(0.05);
        assert!((crit - 1.959964).abs() < 1e-6, "{crit}");
        assert!(2.83f64.abs() >= crit);
        assert!(1.95f64.abs() < crit);
        assert!((-3.82f64).abs() >= crit);
    }

    #[test]
    fn monotone_ascent_and_aic_identity() {
        let mut rng = crate::rng::SplitMix64::new(5);
        let n = 400;
        let schema = Schema::new(vec![
            VariableSpec::indicator("y"),
            VariableSpec::quantitative("x"),
        ])
        .unwrap();
        let mut yc = Vec::new();
        let mut xc = Vec::new();
        for _ in 0..n {
            let x = rng.next_normal();
            let u = -0.5 + 1.2 * x;
            let p = 1.0 / (1.0 + num::exp(-u));
            yc.push(Some((rng.next_f64() < p) as u8 as f64));
            xc.push(Some(x));
        }
        let ds = Dataset::from_columns(schema, vec![yc, xc], "sim").unwrap();
        let spec = ModelSpec::shared(
            "y",
            vec![OutcomeLevel::new("one", 1.0), OutcomeLevel::new("zero", 0.0)],
            vec!["x".into()],
        );
        let fit = fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        assert!(fit.converged);
        for w in fit.iterations.windows(2) {
            // Non-decreasing up to the LL's floating-point resolution.
            assert!(w[1].ll >= w[0].ll - 32.0 * f64::EPSILON * (1.0 + w[0].ll.abs()));
        }
        assert_eq!(fit.aic, -2.0 * fit.ll + 2.0 * fit.k as f64);
        for (i, t) in fit.t_ratios.iter().enumerate() {
            assert_eq!(*t, fit.beta[i] / num::sqrt(fit.covariance.get(i, i)));
        }
        // Covariance is symmetric with a positive diagonal.
        assert!(fit.covariance.asymmetry() < 1e-12);
        for i in 0..fit.k {
            assert!(fit.covariance.get(i, i) > 0.0);
        }
        // The dedicated binary route lands on the same optimum.
        let bin = fit_binary(&spec, &ds, &OptimizerConfig::default()).unwrap();
        for (a, b) in fit.beta.iter().zip(bin.beta.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((fit.ll - bin.ll).abs() < 1e-9);
    }

    #[test]
    fn separation_is_flagged_not_looped() {
        // Perfectly separated: y = 1 exactly when x > 0.
        let schema = Schema::new(vec![
            VariableSpec::indicator("y"),
            VariableSpec::quantitative("x"),
        ])
        .unwrap();
        let mut yc = Vec::new();
        let mut xc = Vec::new();
        for i in 0..40 {
            let x = (i as f64 - 19.5) / 4.0;
            yc.push(Some((x > 0.0) as u8 as f64));
            xc.push(Some(x));
        }
        let ds = Dataset::from_columns(schema, vec![yc, xc], "sep").unwrap();
        let spec = ModelSpec::shared(
            "y",
            vec![OutcomeLevel::new("one", 1.0), OutcomeLevel::new("zero", 0.0)],
            vec!["x".into()],
        );
        let fit = fit(&spec, &ds, &OptimizerConfig::default()).unwrap();
        assert!(fit.separation);
        assert!(!fit.converged);
    }

    #[test]
    fn collinear_columns_are_reported_by_name() {
        let schema = Schema::new(vec![
            VariableSpec::indicator("y"),
            VariableSpec::quantitative("a"),
            VariableSpec::quantitative("b"),
        ])
        .unwrap();
        let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
        let mut rng = crate::rng::SplitMix64::new(8);
        for _ in 0..60 {
            let a = rng.next_normal();
            cols[0].push(Some((rng.next_f64() < 0.5) as u8 as f64));
            cols[1].push(Some(a));
            cols[2].push(Some(2.0 * a)); // exact linear dependence
        }
        let ds = Dataset::from_columns(schema, cols, "col").unwrap();
        let spec = ModelSpec::shared(
            "y",
            vec![OutcomeLevel::new("one", 1.0), OutcomeLevel::new("zero", 0.0)],
            vec!["a".into(), "b".into()],
        );
        match fit(&spec, &ds, &OptimizerConfig::default()) {
            Err(Error::Collinear { columns }) => assert!(!columns.is_empty()),
            other => panic!("expected collinear error, got {other:?}"),
        }
    }

    #[test]
    fn scale_equivariance_of_quantitative_covariates() {
        let mut rng = crate::rng::SplitMix64::new(21);
        let n = 600;
        let scale = 10.0;
        let mut yc = Vec::new();
        let mut xc = Vec::new();
        let mut xs = Vec::new();
        for _ in 0..n {
            let x = rng.next_range(0.0, 3.0);
            let u = 0.4 - 0.9 * x;
            let p = 1.0 / (1.0 + num::exp(-u));
            let y = (rng.next_f64() < p) as u8 as f64;
            yc.push(Some(y));
            xc.push(Some(x));
            xs.push(Some(x * scale));
        }
        let schema = Schema::new(vec![
            VariableSpec::indicator("y"),
            VariableSpec::quantitative("x"),
            VariableSpec::quantitative("x_scaled"),
        ])
        .unwrap();
        let ds = Dataset::from_columns(schema, vec![yc, xc, xs], "sim").unwrap();
        let levels = vec![OutcomeLevel::new("one", 1.0), OutcomeLevel::new("zero", 0.0)];
        let f1 = fit(
            &ModelSpec::shared("y", levels.clone(), vec!["x".into()]),
            &ds,
            &OptimizerConfig::default(),
        )
        .unwrap();
        let f2 = fit(
            &ModelSpec::shared("y", levels, vec!["x_scaled".into()]),
            &ds,
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!((f1.beta[1] / scale - f2.beta[1]).abs() < 1e-7);
        assert!((f1.ll - f2.ll).abs() < 1e-7);
        assert!((f1.aic - f2.aic).abs() < 1e-7);
        assert!((f1.rho2 - f2.rho2).abs() < 1e-7);
        assert!((f1.t_ratios[1] - f2.t_ratios[1]).abs() < 1e-7);
    }
}
