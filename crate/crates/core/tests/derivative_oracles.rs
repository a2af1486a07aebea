//! Independent numerical oracles for the analytic derivatives: central
//! finite differences for the gradient and Hessian, Jacobi eigenvalues for
//! concavity, and the defining probability-derivative form for elasticities.

use choicefit_core::dataset::Dataset;
use choicefit_core::elasticity::{cross_elasticity, direct_elasticity};
use choicefit_core::logit::{self, Design, ModelSpec, OutcomeLevel};
use choicefit_core::rng::SplitMix64;
use choicefit_core::synth::{fd_gradient, generate, CovariateSpec, GeneratorSpec};

/// Random instance with n <= 200 rows, up to 4 outcomes and k <= 10 free
/// coefficients.
fn random_instance(seed: u64) -> (Dataset, ModelSpec, Vec<f64>) {
    let mut rng = SplitMix64::stream(seed, "instance");
    let i_count = 2 + (rng.next_u64() % 3) as usize; // 2..=4 outcomes
    let max_terms = 10 / (i_count - 1);
    let n_cov = 1 + (rng.next_u64() % (max_terms as u64 - 1).max(1)) as usize;
    let n = 40 + (rng.next_u64() % 161) as usize;

    let covariates: Vec<CovariateSpec> = (0..n_cov)
        .map(|c| {
            if c % 2 == 0 {
                CovariateSpec::normal(format!("x{c}"), 0.0, 1.0)
            } else {
                CovariateSpec::uniform(format!("x{c}"), -2.0, 2.0)
            }
        })
        .collect();
    let levels: Vec<OutcomeLevel> = (0..i_count)
        .map(|l| OutcomeLevel::new(format!("level{l}"), l as f64))
        .collect();
    let beta_true: Vec<Vec<f64>> = (0..i_count - 1)
        .map(|_| (0..=n_cov).map(|_| rng.next_range(-0.8, 0.8)).collect())
        .collect();
    let spec = GeneratorSpec {
        n,
        seed: seed ^ 0xA5A5,
        covariates,
        outcome: "y".into(),
        levels: levels.clone(),
        beta: beta_true,
    };
    let ds = generate(&spec).unwrap();
    let model = spec.model_spec();
    let design = Design::build(&model, &ds).unwrap();
    let beta_eval: Vec<f64> = (0..design.k()).map(|_| rng.next_range(-1.0, 1.0)).collect();
    (ds, model, beta_eval)
}

fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    got.iter()
        .zip(want.iter())
        .fold(0.0f64, |a, (g, w)| a.max((g - w).abs()))
        / scale
}

#[test]
fn analytic_gradient_matches_central_differences() {
    for seed in 0..30u64 {
        let (ds, model, beta) = random_instance(seed);
        let design = Design::build(&model, &ds).unwrap();
        let analytic = logit::gradient(&design, &beta).unwrap();
        let numeric = fd_gradient(
            |b| logit::log_likelihood(&design, b).unwrap(),
            &beta,
            1e-5,
        );
        let err = rel_err(&numeric, &analytic);
        assert!(err < 1e-6, "seed {seed}: gradient rel err {err}");
    }
}

#[test]
fn analytic_hessian_matches_differenced_gradient() {
    for seed in 0..20u64 {
        let (ds, model, beta) = random_instance(seed);
        let design = Design::build(&model, &ds).unwrap();
        let k = design.k();
        let hess = logit::hessian(&design, &beta).unwrap();
        assert!(hess.asymmetry() < 1e-12);
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for j in 0..k {
            let column = fd_gradient(
                |b| logit::gradient(&design, b).unwrap()[j],
                &beta,
                1e-5,
            );
            for i in 0..k {
                worst = worst.max((column[i] - hess.get(i, j)).abs());
                scale = scale.max(hess.get(i, j).abs());
            }
        }
        assert!(worst / scale < 1e-5, "seed {seed}: hessian rel err");
    }
}

#[test]
fn hessian_eigenvalues_are_nonpositive() {
    for seed in 0..20u64 {
        let (ds, model, beta) = random_instance(seed);
        let design = Design::build(&model, &ds).unwrap();
        let hess = logit::hessian(&design, &beta).unwrap();
        let eig = hess.symmetric_eigenvalues();
        assert!(
            eig.iter().all(|&e| e <= 1e-10),
            "seed {seed}: eigenvalues {eig:?}"
        );
    }
}

/// Per-observation elasticities against the defining form
/// `(dP/dx) (x / P)`, differencing the probability in the one utility slot
/// that carries the coefficient.
#[test]
fn elasticities_match_probability_derivatives() {
    for seed in 100..130u64 {
        let (ds, model, beta) = random_instance(seed);
        let design = Design::build(&model, &ds).unwrap();
        let i_count = design.n_outcomes();
        let mut rng = SplitMix64::stream(seed, "pick");
        let row = (rng.next_u64() % design.n_rows() as u64) as usize;
        let block = (rng.next_u64() % (i_count as u64 - 1)) as usize;
        let cols = model.blocks[block].terms.len() + 1;
        let col = (rng.next_u64() % cols as u64) as usize;

        let x = design.x_value(block, row, col);
        if x.abs() < 1e-3 {
            continue; // elasticity at x near 0 is itself near 0
        }
        let b = beta[design.param_index(block, col)];
        let p = design.probabilities(&beta, row).unwrap();

        // Utilities as a function of the perturbed slot value.
        let mut utilities = vec![0.0; i_count];
        for bl in 0..i_count - 1 {
            let blk_cols = model.blocks[bl].terms.len() + 1;
            let mut u = 0.0;
            for c in 0..blk_cols {
                u += beta[design.param_index(bl, c)] * design.x_value(bl, row, c);
            }
            utilities[bl] = u;
        }
        let prob_at = |x_val: f64, outcome: usize| -> f64 {
            let mut u = utilities.clone();
            u[block] += b * (x_val - x);
            logit::probabilities_from_utilities(&u)[outcome]
        };

        let h = 1e-5f64.max(1e-7 * x.abs());
        for outcome in 0..i_count {
            let num_deriv = (prob_at(x + h, outcome) - prob_at(x - h, outcome)) / (2.0 * h);
            let fd_elasticity = num_deriv * x / p[outcome];
            let formula = if outcome == block {
                direct_elasticity(p[block], b, x)
            } else {
                cross_elasticity(p[block], b, x)
            };
            let denom = formula.abs().max(1e-6);
            assert!(
                (fd_elasticity - formula).abs() / denom < 1e-6,
                "seed {seed} outcome {outcome}: {fd_elasticity} vs {formula}"
            );
        }
    }
}
