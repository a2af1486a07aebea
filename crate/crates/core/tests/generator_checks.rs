//! Distributional checks on the synthetic generator.

use choicefit_core::inference::chi_squared_sf;
use choicefit_core::logit::{Design, OutcomeLevel};
use choicefit_core::synth::{generate, CovariateSpec, GeneratorSpec};

/// Outcome counts against their model-implied expectations: the Pearson
/// statistic should look chi-squared, so p-values below 0.001 are allowed on
/// at most 1% of seeds.
#[test]
fn generator_outcome_counts_pass_goodness_of_fit() {
    let seeds = 100u64;
    let mut failures = 0usize;
    for seed in 0..seeds {
        let gen = GeneratorSpec {
            n: 10_000,
            seed: 5000 + seed,
            covariates: vec![
                CovariateSpec::normal("x1", 0.0, 1.0),
                CovariateSpec::bernoulli("d1", 0.4),
            ],
            outcome: "y".into(),
            levels: vec![
                OutcomeLevel::new("a", 0.0),
                OutcomeLevel::new("b", 1.0),
                OutcomeLevel::new("c", 2.0),
            ],
            beta: vec![vec![0.3, 0.5, -0.4], vec![-0.1, -0.3, 0.6]],
        };
        let ds = generate(&gen).unwrap();
        let design = Design::build(&gen.model_spec(), &ds).unwrap();

        // Expected counts are the summed model probabilities at the true
        // coefficients.
        let beta_flat: Vec<f64> = gen.beta.iter().flatten().copied().collect();
        let mut expected = [0.0f64; 3];
        for row in 0..design.n_rows() {
            let p = design.probabilities(&beta_flat, row).unwrap();
            for (e, pi) in expected.iter_mut().zip(p.iter()) {
                *e += pi;
            }
        }
        let observed = design.outcome_counts();
        let statistic: f64 = observed
            .iter()
            .zip(expected.iter())
            .map(|(&o, &e)| {
                let d = o as f64 - e;
                d * d / e
            })
            .sum();
        let p = chi_squared_sf(statistic, 2);
        if p <= 0.001 {
            failures += 1;
        }
    }
    assert!(failures <= 1, "{failures}/{seeds} seeds failed goodness of fit");
}
