//! JSON views of core results. All documents are built as `serde_json`
//! values whose object keys are sorted, so byte output is deterministic for
//! a given run configuration.

use choicefit_core::dataset::Distribution;
use choicefit_core::elasticity::ElasticityReport;
use choicefit_core::inference::LRTestResult;
use choicefit_core::mle::{significance, FitResult};
use choicefit_core::selection::{SelectionEvent, SelectionResult, SelectionTrace};
use serde_json::{json, Value};

pub fn fit_json(fit: &FitResult, level: f64) -> Value {
    let flags = significance(fit, level);
    let coefficients: Vec<Value> = fit
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            json!({
                "outcome": name.outcome,
                "term": name.term,
                "estimate": fit.beta[i],
                "std_error": fit.covariance.get(i, i).sqrt(),
                "t_ratio": fit.t_ratios[i],
                "significant": flags[i],
            })
        })
        .collect();
    json!({
        "coefficients": coefficients,
        "ll": fit.ll,
        "ll_restricted": fit.ll_restricted,
        "rho2": fit.rho2,
        "aic": fit.aic,
        "n_used": fit.n_used,
        "k": fit.k,
        "converged": fit.converged,
        "separation": fit.separation,
        "iterations": fit.iterations.len(),
    })
}

pub fn distribution_json(d: &Distribution) -> Value {
    json!({
        "variable": d.variable,
        "n": d.n,
        "shares": d.shares.iter().map(|s| json!({
            "value": s.value,
            "label": s.label,
            "count": s.count,
            "percent": s.percent,
        })).collect::<Vec<_>>(),
    })
}

pub fn lr_json(lr: &LRTestResult, conclusion: &str) -> Value {
    json!({
        "ll_pooled": lr.ll_pooled,
        "ll_bins": lr.ll_bins,
        "ll_bins_sum": lr.ll_bins_sum,
        "m": lr.m,
        "k": lr.k,
        "statistic": lr.statistic,
        "df": lr.df,
        "p_value": lr.p_value,
        "level": lr.level,
        "reject": lr.reject,
        "conclusion": conclusion,
    })
}

pub fn elasticity_json(report: &ElasticityReport) -> Value {
    json!({
        "variable": report.variable,
        "n_averaged": report.n_averaged,
        "per_outcome": report.per_outcome.iter().map(|oe| json!({
            "outcome": oe.outcome,
            "direct": oe.direct,
            "cross": oe.cross,
        })).collect::<Vec<_>>(),
    })
}

fn term_json(term: &choicefit_core::selection::Term) -> Value {
    json!({ "block": term.block, "variable": term.variable })
}

fn event_json(event: &SelectionEvent) -> Value {
    match event {
        SelectionEvent::Add {
            term,
            aic_before,
            aic_after,
            n_before,
            n_after,
            t_ratio,
        } => json!({
            "event": "add",
            "term": term_json(term),
            "aic_before": aic_before,
            "aic_after": aic_after,
            "n_before": n_before,
            "n_after": n_after,
            "t_ratio": t_ratio,
        }),
        SelectionEvent::Remove {
            term,
            aic_before,
            aic_after,
            n,
            t_ratio,
        } => json!({
            "event": "remove",
            "term": term_json(term),
            "aic_before": aic_before,
            "aic_after": aic_after,
            "n": n,
            "t_ratio": t_ratio,
        }),
        SelectionEvent::Refresh { n_before, n_after } => json!({
            "event": "refresh",
            "n_before": n_before,
            "n_after": n_after,
        }),
        SelectionEvent::Finalize {
            term,
            aic_before,
            aic_after,
            n_before,
            n_after,
            t_ratio,
        } => json!({
            "event": "finalize",
            "term": term_json(term),
            "aic_before": aic_before,
            "aic_after": aic_after,
            "n_before": n_before,
            "n_after": n_after,
            "t_ratio": t_ratio,
        }),
        SelectionEvent::Skip { term, reason } => json!({
            "event": "skip",
            "term": term_json(term),
            "reason": reason,
        }),
    }
}

/// Selection trace as JSON lines, one event per line, for audit and replay.
pub fn trace_jsonl(trace: &SelectionTrace) -> String {
    let mut out = String::new();
    for event in &trace.events {
        out.push_str(&event_json(event).to_string());
        out.push('\n');
    }
    out
}

pub fn selection_json(result: &SelectionResult, level: f64) -> Value {
    json!({
        "procedure": match result.procedure {
            choicefit_core::selection::Procedure::A => "A",
            choicefit_core::selection::Procedure::B => "B",
        },
        "search_converged": result.search_converged,
        "aic_optimal": {
            "terms": result.aic_optimal_terms.iter().map(term_json).collect::<Vec<_>>(),
            "fit": fit_json(&result.aic_optimal, level),
        },
        "final": {
            "terms": result.final_terms.iter().map(term_json).collect::<Vec<_>>(),
            "fit": fit_json(&result.final_fit, level),
        },
        "events": result.trace.events.len(),
    })
}

/// Pretty-printed JSON document with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
