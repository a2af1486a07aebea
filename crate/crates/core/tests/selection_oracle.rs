//! Stepwise search against the exhaustive-enumeration oracle, plus the
//! asymptotic link between AIC changes and squared t-ratios.

use choicefit_core::logit::OutcomeLevel;
use choicefit_core::mle::{self, OptimizerConfig};
use choicefit_core::selection::{aic, run_procedure, Procedure, SelectionConfig, Term};
use choicefit_core::synth::{exhaustive_aic, generate, CovariateSpec, GeneratorSpec};

fn binary_levels() -> Vec<OutcomeLevel> {
    vec![
        OutcomeLevel::new("one", 0.0),
        OutcomeLevel::new("zero", 1.0),
    ]
}

/// Planted binary instance: `n_signal` strong covariates, the rest noise,
/// no missing data.
fn planted(seed: u64, n: usize, n_signal: usize, n_noise: usize) -> (GeneratorSpec, Vec<String>) {
    let total = n_signal + n_noise;
    let covariates: Vec<CovariateSpec> = (0..total)
        .map(|c| CovariateSpec::normal(format!("x{c}"), 0.0, 1.0))
        .collect();
    let mut beta = vec![0.25];
    for c in 0..total {
        beta.push(if c < n_signal { 0.7 } else { 0.0 });
    }
    let spec = GeneratorSpec {
        n,
        seed,
        covariates,
        outcome: "y".into(),
        levels: binary_levels(),
        beta: vec![beta],
    };
    let names = (0..total).map(|c| format!("x{c}")).collect();
    (spec, names)
}

#[test]
fn greedy_search_reaches_the_exhaustive_optimum_on_planted_data() {
    let cfg = SelectionConfig::default();
    for seed in 1..=5u64 {
        let (gen, candidates) = planted(seed, 1500, 5, 3);
        let ds = generate(&gen).unwrap();
        let oracle = exhaustive_aic(
            &ds,
            &candidates,
            "y",
            &gen.levels,
            &cfg.optimizer,
        )
        .unwrap();

        for procedure in [Procedure::A, Procedure::B] {
            let result = run_procedure(
                procedure,
                &ds,
                "y",
                gen.levels.clone(),
                &candidates,
                &[],
                &cfg,
            )
            .unwrap();
            let mut greedy: Vec<String> = result
                .aic_optimal_terms
                .iter()
                .map(|t| t.variable.clone())
                .collect();
            greedy.sort();
            let mut oracle_vars = oracle.variables.clone();
            oracle_vars.sort();
            assert_eq!(
                greedy, oracle_vars,
                "seed {seed}, {procedure:?}: greedy support differs from oracle"
            );
            // Oracle dominance (equality allowed: same support, same sample).
            assert!(result.aic_optimal.aic >= oracle.aic - 1e-9);
        }
    }
}

#[test]
fn planted_noise_is_removed_and_signals_survive() {
    // Eight candidates, three of them pure noise: the noise goes, the five
    // signals stay, and the oracle confirms the support is AIC-optimal.
    let cfg = SelectionConfig::default();
    let (gen, candidates) = planted(77, 2500, 5, 3);
    let ds = generate(&gen).unwrap();
    let result = run_procedure(
        Procedure::A,
        &ds,
        "y",
        gen.levels.clone(),
        &candidates,
        &[],
        &cfg,
    )
    .unwrap();
    for c in 0..5 {
        assert!(result.final_terms.contains(&Term::new(0, format!("x{c}"))));
    }
    for c in 5..8 {
        assert!(!result.final_terms.contains(&Term::new(0, format!("x{c}"))));
    }
    let oracle = exhaustive_aic(&ds, &candidates, "y", &gen.levels, &cfg.optimizer).unwrap();
    let mut oracle_vars = oracle.variables;
    oracle_vars.sort();
    let mut greedy: Vec<String> = result
        .aic_optimal_terms
        .iter()
        .map(|t| t.variable.clone())
        .collect();
    greedy.sort();
    assert_eq!(greedy, oracle_vars);
}

/// Removing a coefficient with t-ratio t changes the AIC by about t^2 - 2
/// when the maximum-likelihood asymptotics hold, so a |t| of sqrt(2) is
/// AIC-neutral. With N = 100,000 and no missing data the identity holds to
/// better than 0.05 on every seed.
#[test]
fn aic_change_equals_t_squared_minus_two_asymptotically() {
    let cfg = OptimizerConfig::default();
    let n = 100_000;
    for seed in 1..=20u64 {
        // True effect sized so the fitted |t| hovers around sqrt(2).
        let gen = GeneratorSpec {
            n,
            seed,
            covariates: vec![CovariateSpec::normal("x", 0.0, 1.0)],
            outcome: "y".into(),
            levels: binary_levels(),
            beta: vec![vec![0.0, 0.0089]],
        };
        let ds = generate(&gen).unwrap();
        let full = mle::fit(&gen.model_spec(), &ds, &cfg).unwrap();
        let reduced_spec = choicefit_core::logit::ModelSpec::shared(
            "y",
            binary_levels(),
            vec![],
        );
        let reduced = mle::fit(&reduced_spec, &ds, &cfg).unwrap();
        let t = full.t_ratios[full.param_index("one", "x").unwrap()];
        let delta_aic = aic(reduced.ll, reduced.k) - aic(full.ll, full.k);
        let wald = t * t - 2.0;
        assert!(
            (delta_aic - wald).abs() < 0.05,
            "seed {seed}: delta AIC {delta_aic} vs t^2 - 2 = {wald} (t = {t})"
        );
    }
}

/// With missing data, rows excluded for removed variables come back: a
/// refresh event fires after the cadence of four removals, and the final
/// model is reported on its own complete-case sample.
#[test]
fn sample_refresh_recovers_rows_as_noise_leaves() {
    use choicefit_core::selection::SelectionEvent;
    let gen = GeneratorSpec {
        n: 3000,
        seed: 31,
        covariates: vec![
            CovariateSpec::normal("signal", 0.0, 1.0),
            CovariateSpec::normal("n1", 0.0, 1.0).with_missing_rate(0.10),
            CovariateSpec::normal("n2", 0.0, 1.0).with_missing_rate(0.10),
            CovariateSpec::normal("n3", 0.0, 1.0).with_missing_rate(0.10),
            CovariateSpec::normal("n4", 0.0, 1.0).with_missing_rate(0.10),
        ],
        outcome: "y".into(),
        levels: binary_levels(),
        beta: vec![vec![0.2, 0.9, 0.0, 0.0, 0.0, 0.0]],
    };
    let ds = generate(&gen).unwrap();
    let candidates: Vec<String> = vec![
        "signal".into(),
        "n1".into(),
        "n2".into(),
        "n3".into(),
        "n4".into(),
    ];
    let result = run_procedure(
        Procedure::A,
        &ds,
        "y",
        gen.levels.clone(),
        &candidates,
        &[],
        &SelectionConfig::default(),
    )
    .unwrap();

    // The noise went, the signal stayed.
    assert_eq!(result.final_terms, vec![Term::new(0, "signal")]);
    // A refresh brought excluded observations back.
    let refresh = result
        .trace
        .events
        .iter()
        .find_map(|e| match e {
            SelectionEvent::Refresh { n_before, n_after } => Some((*n_before, *n_after)),
            _ => None,
        })
        .expect("a refresh event fired");
    assert!(refresh.1 > refresh.0, "refresh did not grow the sample");
    // The reported final sample is the complete-case sample of the final
    // variable set: signal and y have no missing values.
    assert_eq!(result.final_fit.n_used, 3000);
    // Removal events between refreshes show strictly decreasing AIC on the
    // fixed sample.
    let mut last_aic: Option<f64> = None;
    for event in &result.trace.events {
        match event {
            SelectionEvent::Remove {
                aic_before,
                aic_after,
                ..
            } => {
                if let Some(prev) = last_aic {
                    assert!(*aic_before <= prev + 1e-9);
                }
                assert!(aic_after < aic_before);
                last_aic = Some(*aic_after);
            }
            SelectionEvent::Refresh { .. } => last_aic = None,
            _ => {}
        }
    }
}

/// Probing a pure-noise variable into the AIC-optimal model yields an
/// insignificant coefficient almost always.
#[test]
fn probing_noise_is_insignificant_in_at_least_ninety_percent_of_seeds() {
    let cfg = SelectionConfig::default();
    let mut insignificant = 0usize;
    let seeds = 100u64;
    for seed in 0..seeds {
        let gen = GeneratorSpec {
            n: 1000,
            seed: 1000 + seed,
            covariates: vec![
                CovariateSpec::normal("s1", 0.0, 1.0),
                CovariateSpec::normal("s2", 0.0, 1.0),
                CovariateSpec::normal("noise", 0.0, 1.0),
            ],
            outcome: "y".into(),
            levels: binary_levels(),
            beta: vec![vec![-0.2, 0.8, -0.6, 0.0]],
        };
        let ds = generate(&gen).unwrap();
        let result = run_procedure(
            Procedure::A,
            &ds,
            "y",
            binary_levels(),
            &["s1".to_string(), "s2".to_string()],
            &[],
            &cfg,
        )
        .unwrap();
        let cells = result
            .probe_variable(&ds, "noise", &cfg.optimizer)
            .unwrap();
        if cells[0].t_ratio.abs() < 1.959964 {
            insignificant += 1;
        }
    }
    assert!(
        insignificant >= 90,
        "only {insignificant}/{seeds} probes were insignificant"
    );
}
