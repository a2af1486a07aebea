//! Likelihood-ratio structural tests and the chi-squared tail they rely on.
//!
//! The statistic `-2 (LL_pooled - sum_m LL_m)` compares one model estimated
//! on a whole sample against the same model re-estimated separately on M
//! disjoint subsets; under the null of no structural difference it is
//! chi-squared with `(M - 1) K` degrees of freedom. The statistic is
//! non-negative whenever the fits really come from a partition, because the
//! split models can only fit better.
//!
//! Two harnesses are built on top: [`pooling_test`] (can two vehicle groups
//! be modeled together?) and [`bin_structure_test`] (does a binning variable
//! such as the speed limit change the model structure across bins?).

use crate::dataset::{BinningSpec, Dataset};
use crate::error::Error;
use crate::logit::ModelSpec;
use crate::mle::{self, FitResult, OptimizerConfig};
use crate::num;
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

const MAX_ITER: usize = 400;

/// Series expansion of the regularized lower incomplete gamma P(a, z),
/// accurate for z < a + 1.
fn gamma_p_series(a: f64, z: f64) -> f64 {
    let log_prefactor = -z + a * num::ln(z) - num::ln_gamma(a);
    let prefactor = num::exp(log_prefactor);
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    prefactor * sum
}

/// Modified Lentz continued fraction for the regularized upper incomplete
/// gamma Q(a, z), accurate for z >= a + 1.
fn gamma_q_cf(a: f64, z: f64) -> f64 {
    let log_prefactor = -z + a * num::ln(z) - num::ln_gamma(a);
    let prefactor = num::exp(log_prefactor);
    let tiny = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b.max(tiny);
    let mut f = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    prefactor * f
}

/// Survival function of the chi-squared distribution: `Pr(X > x)` for `df`
/// degrees of freedom.
///
/// Conventions: negative `x` is clamped to zero, and `df = 0` denotes the
/// degenerate point mass at zero, giving 1 for `x <= 0` and 0 otherwise.
pub fn chi_squared_sf(x: f64, df: u32) -> f64 {
    if df == 0 {
        return if x <= 0.0 { 1.0 } else { 0.0 };
    }
    let x = x.max(0.0);
    if x == 0.0 {
        return 1.0;
    }
    let a = df as f64 / 2.0;
    let z = x / 2.0;
    if z < a + 1.0 {
        (1.0 - gamma_p_series(a, z)).clamp(0.0, 1.0)
    } else {
        gamma_q_cf(a, z).clamp(0.0, 1.0)
    }
}

/// Outcome of one likelihood-ratio structural test.
#[derive(Debug, Clone, PartialEq)]
pub struct LRTestResult {
    pub ll_pooled: f64,
    /// Per-subset log-likelihoods; empty when replayed from a published sum.
    pub ll_bins: Vec<f64>,
    pub ll_bins_sum: f64,
    /// Number of subsets.
    pub m: usize,
    /// Coefficients per model.
    pub k: usize,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Significance level the decision was taken at.
    pub level: f64,
    pub reject: bool,
}

/// Likelihood-ratio test from individual subset log-likelihoods.
pub fn lr_test(ll_pooled: f64, ll_bins: &[f64], k: usize, level: f64) -> Result<LRTestResult> {
    let sum = num::sum_pairwise(ll_bins);
    let mut result = lr_test_from_sums(ll_pooled, sum, ll_bins.len(), k, level)?;
    result.ll_bins = ll_bins.to_vec();
    Ok(result)
}

/// Likelihood-ratio test from the pooled log-likelihood and the published
/// subset sum, as needed to replay printed test tables.
pub fn lr_test_from_sums(
    ll_pooled: f64,
    ll_bins_sum: f64,
    m: usize,
    k: usize,
    level: f64,
) -> Result<LRTestResult> {
    if m < 2 {
        return Err(Error::InvalidSpec(format!(
            "a likelihood-ratio test needs at least two subsets, got {m}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "significance level {level} is outside (0, 1)"
        )));
    }
    if ll_bins_sum < ll_pooled - 1e-6 {
        return Err(Error::NestingViolation {
            ll_pooled,
            ll_sum: ll_bins_sum,
        });
    }
    let statistic = (-2.0 * (ll_pooled - ll_bins_sum)).max(0.0);
    let df = (m - 1) * k;
    let p_value = chi_squared_sf(statistic, df as u32);
    Ok(LRTestResult {
        ll_pooled,
        ll_bins: Vec::new(),
        ll_bins_sum,
        m,
        k,
        statistic,
        df,
        p_value,
        level,
        reject: p_value < level,
    })
}

/// Verdict of a pooling test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolingConclusion {
    /// No structural difference: the groups can be modeled together.
    Together,
    /// The groups must be modeled separately.
    Separately,
}

impl PoolingConclusion {
    pub fn as_str(&self) -> &'static str {
        match self {
            PoolingConclusion::Together => "together",
            PoolingConclusion::Separately => "separately",
        }
    }
}

/// Disjoint value groups of one categorical variable, e.g. vehicle-pair
/// codes split into car+car / car+SUV / SUV+SUV.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRule {
    pub variable: String,
    pub groups: Vec<(String, Vec<f64>)>,
}

impl SplitRule {
    fn validate(&self) -> Result<()> {
        if self.groups.len() < 2 {
            return Err(Error::InvalidSpec(
                "a split rule needs at least two groups".into(),
            ));
        }
        for (i, (label, values)) in self.groups.iter().enumerate() {
            for (other, prev) in &self.groups[..i] {
                if values.iter().any(|v| prev.contains(v)) {
                    return Err(Error::InvalidSpec(format!(
                        "split groups `{label}` and `{other}` overlap"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Result of [`pooling_test`].
#[derive(Debug, Clone)]
pub struct PoolingTest {
    pub lr: LRTestResult,
    pub pooled_fit: FitResult,
    pub subset_fits: Vec<(String, FitResult)>,
    pub conclusion: PoolingConclusion,
}

/// Fit the same model on the pooled sample and on every split group, then
/// test whether the split changes the structure.
pub fn pooling_test(
    spec: &ModelSpec,
    ds: &Dataset,
    split: &SplitRule,
    cfg: &OptimizerConfig,
    level: f64,
) -> Result<PoolingTest> {
    split.validate()?;
    let mut subsets = Vec::with_capacity(split.groups.len());
    let mut all_values = Vec::new();
    for (label, values) in &split.groups {
        let subset = ds.filter_in(&split.variable, values)?;
        if subset.n_rows() == 0 {
            return Err(Error::Underdetermined { n_used: 0, k: 0 }.in_subset(label.clone()));
        }
        subsets.push((label.clone(), subset));
        all_values.extend_from_slice(values);
    }
    let pooled = ds.filter_in(&split.variable, &all_values)?;
    let pooled_fit = mle::fit(spec, &pooled, cfg)?;
    let mut subset_fits = Vec::with_capacity(subsets.len());
    let mut lls = Vec::with_capacity(subsets.len());
    for (label, subset) in subsets {
        let fit = mle::fit(spec, &subset, cfg).map_err(|e| e.in_subset(label.clone()))?;
        lls.push(fit.ll);
        subset_fits.push((label, fit));
    }
    let lr = lr_test(pooled_fit.ll, &lls, pooled_fit.k, level)?;
    let conclusion = if lr.reject {
        PoolingConclusion::Separately
    } else {
        PoolingConclusion::Together
    };
    Ok(PoolingTest {
        lr,
        pooled_fit,
        subset_fits,
        conclusion,
    })
}

/// Verdict of a bin-structure test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectConclusion {
    /// The binning variable changes the model structure.
    Effect,
    NoEffect,
}

impl EffectConclusion {
    /// Published conclusion wording; the binning variable in this domain is
    /// the posted speed limit.
    pub fn as_str(&self) -> &'static str {
        match self {
            EffectConclusion::Effect => "SL effect",
            EffectConclusion::NoEffect => "no SL effect",
        }
    }
}

/// One variable dropped before the bin-structure test, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovedVariable {
    pub variable: String,
    pub reason: String,
}

/// Result of [`bin_structure_test`].
#[derive(Debug, Clone)]
pub struct BinStructureTest {
    pub lr: LRTestResult,
    pub pooled_fit: FitResult,
    pub bin_fits: Vec<(String, FitResult)>,
    pub removed: Vec<RemovedVariable>,
    pub dropped_empty_bins: Vec<String>,
    pub merged_bins: Vec<String>,
    pub conclusion: EffectConclusion,
}

/// Values of `var` over the estimation sample of `spec` within `ds`
/// (complete cases of all model variables, outcome level matched).
fn estimation_values(spec: &ModelSpec, ds: &Dataset, var: &str) -> Result<Vec<f64>> {
    let mut vars = spec.explanatory_variables();
    vars.push(spec.outcome.clone());
    let (cc, _) = ds.complete_cases(&vars)?;
    let outcome = cc.column(&spec.outcome)?.to_vec();
    let col = cc.column(var)?;
    Ok(col
        .iter()
        .zip(outcome.iter())
        .filter(|(_, y)| {
            y.is_some_and(|yv| spec.levels.iter().any(|l| l.value == yv))
        })
        .map(|(v, _)| v.unwrap())
        .collect())
}

fn without_variable(spec: &ModelSpec, var: &str) -> ModelSpec {
    let mut out = spec.clone();
    for block in &mut out.blocks {
        block.terms.retain(|t| t != var);
    }
    out
}

/// Re-estimate the final model separately inside each bin of a quantitative
/// variable and test the bin structure against the pooled fit.
///
/// Before testing, the binning variable itself and any variable constant
/// inside some bin's estimation sample are removed from the model (each
/// removal is reported). Empty bins are dropped. Bins with too few usable
/// rows are merged into their neighbor when `merge_small_bins` is set, and
/// are an error otherwise.
pub fn bin_structure_test(
    final_spec: &ModelSpec,
    ds: &Dataset,
    bins: &BinningSpec,
    cfg: &OptimizerConfig,
    level: f64,
    merge_small_bins: bool,
) -> Result<BinStructureTest> {
    let mut spec = final_spec.clone();
    let mut removed = Vec::new();

    // The binning variable is near-constant inside bins by construction and
    // goes first.
    if spec.explanatory_variables().contains(&bins.variable) {
        spec = without_variable(&spec, &bins.variable);
        removed.push(RemovedVariable {
            variable: bins.variable.clone(),
            reason: "binning variable".to_string(),
        });
    }

    let binned = ds.bin(bins)?;
    let mut parts: Vec<(String, Dataset)> = Vec::new();
    let mut dropped_empty_bins = Vec::new();
    for (interval, data) in binned.intervals.iter().zip(binned.bins) {
        if data.n_rows() == 0 {
            dropped_empty_bins.push(interval.label());
        } else {
            parts.push((interval.label(), data));
        }
    }

    // Drop variables that are constant inside some bin's estimation sample.
    'constants: loop {
        for var in spec.explanatory_variables() {
            for (label, data) in &parts {
                let values = estimation_values(&spec, data, &var)?;
                if values.len() >= 2 && values.windows(2).all(|w| w[0] == w[1]) {
                    spec = without_variable(&spec, &var);
                    removed.push(RemovedVariable {
                        variable: var.clone(),
                        reason: format!("constant inside bin {label}"),
                    });
                    continue 'constants;
                }
            }
        }
        break;
    }

    let k: usize = spec
        .blocks
        .iter()
        .map(|b| b.intercept as usize + b.terms.len())
        .sum();

    // Merge (or reject) bins that cannot identify k coefficients.
    let mut all_vars = spec.explanatory_variables();
    all_vars.push(spec.outcome.clone());
    let usable = |d: &Dataset| -> Result<usize> {
        Ok(d.complete_cases(&all_vars)?.0.n_rows())
    };
    let mut merged_bins = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        if usable(&parts[i].1)? > k {
            i += 1;
            continue;
        }
        if !merge_small_bins {
            return Err(Error::Underdetermined {
                n_used: usable(&parts[i].1)?,
                k,
            }
            .in_subset(parts[i].0.clone()));
        }
        if parts.len() < 2 {
            return Err(Error::InvalidSpec(
                "fewer than two estimable bins remain after merging".into(),
            ));
        }
        // Merge into the previous bin when one exists, else into the next.
        let (small_label, small) = parts.remove(i);
        let t = if i > 0 { i - 1 } else { 0 };
        let merged = parts[t].1.concat(&small)?;
        merged_bins.push(format!("merged bin {} into {}", small_label, parts[t].0));
        parts[t].1 = merged;
        i = 0; // sizes changed; re-scan from the start
    }
    if parts.len() < 2 {
        return Err(Error::InvalidSpec(
            "bin-structure test needs at least two non-empty bins".into(),
        ));
    }

    // Pooled sample = union of the surviving bins.
    let mut pooled = parts[0].1.clone();
    for (_, data) in &parts[1..] {
        pooled = pooled.concat(data)?;
    }
    let pooled_fit = mle::fit(&spec, &pooled, cfg)?;
    let mut bin_fits = Vec::with_capacity(parts.len());
    let mut lls = Vec::with_capacity(parts.len());
    for (label, data) in parts {
        let fit = mle::fit(&spec, &data, cfg).map_err(|e| e.in_subset(label.clone()))?;
        lls.push(fit.ll);
        bin_fits.push((label, fit));
    }
    let lr = lr_test(pooled_fit.ll, &lls, pooled_fit.k, level)?;
    let conclusion = if lr.reject {
        EffectConclusion::Effect
    } else {
        EffectConclusion::NoEffect
    };
    Ok(BinStructureTest {
        lr,
        pooled_fit,
        bin_fits,
        removed,
        dropped_empty_bins,
        merged_bins,
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sf_at_zero_is_one() {
        for df in [1u32, 2, 5, 14, 60, 500] {
            assert_eq!(chi_squared_sf(0.0, df), 1.0);
        }
    }

    #[test]
    fn sf_df2_is_exact_exponential() {
        // P(chi2_2 > x) = exp(-x/2); at x = 2 ln 20 that is exactly 0.05.
        let x = 2.0 * num::ln(20.0);
        assert!((chi_squared_sf(x, 2) - 0.05).abs() < 1e-12);
        for x in [0.5f64, 1.0, 3.7, 10.0, 40.0, 100.0] {
            let want = num::exp(-x / 2.0);
            assert!((chi_squared_sf(x, 2) - want).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn sf_even_df_matches_poisson_sum() {
        // For even df = 2m, P(X > x) = exp(-x/2) sum_{j<m} (x/2)^j / j!.
        for (x, df) in [(16.26f64, 14u32), (7.0, 4), (30.0, 20), (3.3, 8)] {
            let m = df / 2;
            let half = x / 2.0;
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..m {
                term *= half / j as f64;
                sum += term;
            }
            let want = num::exp(-half) * sum;
            let got = chi_squared_sf(x, df);
            assert!((got - want).abs() < 1e-12, "x={x} df={df}: {got} vs {want}");
        }
    }

    #[test]
    fn sf_stays_accurate_at_large_df_and_x() {
        // For even df the tail has an exact Poisson-sum form, stable when
        // accumulated from the exponential term upward.
        let poisson_tail = |x: f64, df: u32| -> f64 {
            let half = x / 2.0;
            let mut term = num::exp(-half);
            let mut sum = term;
            for j in 1..(df / 2) {
                term *= half / j as f64;
                sum += term;
            }
            sum.min(1.0)
        };
        for df in [100u32, 240, 500] {
            for x in [df as f64 * 0.8, df as f64, df as f64 * 1.2, 1000.0] {
                let got = chi_squared_sf(x, df);
                let want = poisson_tail(x, df);
                assert!(
                    (got - want).abs() <= 1e-10,
                    "df={df} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn sf_degenerate_and_clamped_arguments() {
        assert_eq!(chi_squared_sf(0.0, 0), 1.0);
        assert_eq!(chi_squared_sf(3.0, 0), 0.0);
        assert_eq!(chi_squared_sf(-1.0, 5), 1.0);
    }

    #[test]
    fn sf_strictly_decreasing_in_x() {
        // Strictly decreasing wherever the value is representably below 1;
        // for large df and small x the tail saturates at 1.0 in f64.
        for df in [1u32, 2, 7, 14, 33, 60] {
            let mut prev = chi_squared_sf(0.0, df);
            let mut x = 0.5;
            while x <= 120.0 {
                let cur = chi_squared_sf(x, df);
                if prev < 1.0 - 1e-12 {
                    assert!(cur < prev, "df={df} x={x}");
                } else {
                    assert!(cur <= prev, "df={df} x={x}");
                }
                prev = cur;
                x += 0.5;
            }
        }
    }

    #[test]
    fn lr_replay_of_causation_pooling_row() {
        // Pooled LL -1426.61 vs split sum -1418.48 over 3 groups of 7
        // coefficients: statistic 16.26 on 14 df, p near 0.30, no rejection.
        let r = lr_test_from_sums(-1426.61, -1418.48, 3, 7, 0.05).unwrap();
        assert!((r.statistic - 16.26).abs() < 1e-9);
        assert_eq!(r.df, 14);
        assert!((r.p_value - 0.2977).abs() < 1e-3);
        assert!(!r.reject);
    }

    #[test]
    fn lr_replay_of_severity_bin_row() {
        // Pooled -1310.1 vs bin sum -1293.1 over 2 bins of 11 coefficients:
        // statistic 34.0 on 11 df, p near 3.8e-4, rejection.
        let r = lr_test_from_sums(-1310.1, -1293.1, 2, 11, 0.05).unwrap();
        assert!((r.statistic - 34.0).abs() < 1e-9);
        assert_eq!(r.df, 11);
        assert!((r.p_value - 3.8e-4).abs() < 0.2e-4);
        assert!(r.reject);
    }

    #[test]
    fn identical_fits_give_zero_statistic() {
        let r = lr_test(-100.0, &[-60.0, -40.0], 4, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
    }

    #[test]
    fn nesting_violation_is_an_error() {
        assert!(matches!(
            lr_test(-100.0, &[-60.0, -41.0], 4, 0.05),
            Err(Error::NestingViolation { .. })
        ));
        // Within tolerance the statistic clamps to zero instead.
        let r = lr_test(-100.0, &[-60.0, -40.0000001], 4, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn single_bin_is_rejected() {
        assert!(lr_test(-10.0, &[-10.0], 3, 0.05).is_err());
    }

    #[test]
    fn permuting_bins_leaves_the_test_unchanged() {
        let bins = vec![-310.2, -401.7, -55.9, -120.4];
        let a = lr_test(-900.0, &bins, 5, 0.05).unwrap();
        let permuted = vec![-120.4, -310.2, -55.9, -401.7];
        let b = lr_test(-900.0, &permuted, 5, 0.05).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9);
        assert_eq!(a.df, b.df);
        assert!((a.p_value - b.p_value).abs() < 1e-9);
    }
}
