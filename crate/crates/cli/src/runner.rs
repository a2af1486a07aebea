//! Command implementations: each returns printable text plus a set of
//! deterministic output files (written under `--out` when given).

use crate::config::{outcome_labels, RunConfig};
use crate::csv::{load_dataset, write_csv, LoadOptions};
use crate::error::{CliError, Result};
use crate::fixtures::{replay, replay_json, replay_text, FixturesDoc};
use crate::jsonout;
use crate::logging;
use crate::report::{self, FocalCell, LrTableRow, ModelTableRow};
use crate::schema::SchemaDoc;
use choicefit_core::dataset::{Dataset, PartitionKey, VariableKind};
use choicefit_core::elasticity::averaged_elasticities;
use choicefit_core::inference::{
    bin_structure_test, lr_test_from_sums, pooling_test, EffectConclusion, PoolingConclusion,
};
use choicefit_core::logit::{ModelSpec, OutcomeLevel};
use choicefit_core::mle;
use choicefit_core::selection::{run_procedure, Procedure, SelectionResult, Term};
use choicefit_core::synth::{generate, CovariateDistribution, CovariateSpec, GeneratorSpec};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// What a command produces: text for stdout and named files for `--out`.
pub struct CommandOutput {
    pub text: String,
    pub files: Vec<(String, String)>,
}

impl CommandOutput {
    fn new(text: String) -> Self {
        CommandOutput {
            text,
            files: Vec::new(),
        }
    }

    fn with_file(mut self, name: impl Into<String>, contents: String) -> Self {
        self.files.push((name.into(), contents));
        self
    }

    pub fn write_files(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CliError::io(out_dir.display().to_string(), e))?;
        for (name, contents) in &self.files {
            let path = out_dir.join(name);
            std::fs::write(&path, contents)
                .map_err(|e| CliError::io(path.display().to_string(), e))?;
        }
        Ok(())
    }
}

fn load_schema(cfg: &RunConfig) -> Result<choicefit_core::dataset::Schema> {
    let doc = match &cfg.schema {
        Some(path) => SchemaDoc::load(path)?,
        None => SchemaDoc::embedded_default(),
    };
    doc.to_core()
}

fn load_options(cfg: &RunConfig) -> LoadOptions {
    let mut options = LoadOptions::default();
    if let Some(d) = cfg.delimiter {
        options.delimiter = d;
    }
    if let Some(tokens) = &cfg.missing_tokens {
        options.missing_tokens = tokens.clone();
    }
    if let Some(strict) = cfg.strict {
        options.strict = strict;
    }
    options
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::config("this command needs `data` (a CSV path)"))?;
    let schema = load_schema(cfg)?;
    let ds = load_dataset(path, &schema, &load_options(cfg))?;
    logging::info(format!(
        "loaded {} rows x {} variables from {}",
        ds.n_rows(),
        ds.schema().len(),
        path.display()
    ));
    Ok(ds)
}

/// Deterministic worker pool: results land in input order regardless of the
/// number of workers.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    jobs: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let n = items.len();
    let workers = jobs.max(1).min(n.max(1));
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled slot"))
        .collect()
}

// ---------------------------------------------------------------------------
// describe

pub fn cmd_describe(cfg: &RunConfig) -> Result<CommandOutput> {
    let ds = load_data(cfg)?;
    let variables = cfg
        .describe
        .as_ref()
        .ok_or_else(|| CliError::config("`describe` needs a `describe` variable list"))?;
    let binned = match &cfg.bins {
        Some(_) => Some(ds.bin(&cfg.binning_spec()?).map_err(CliError::Core)?),
        None => None,
    };

    let mut text = String::new();
    let mut blocks = Vec::new();
    for var in variables {
        let overall = ds.describe(var).map_err(CliError::Core)?;
        text.push_str(&report::render_distribution(&overall, &format!("{var}, overall")));
        text.push('\n');
        let mut bin_values = Vec::new();
        if let Some(binned) = &binned {
            for (interval, bin) in binned.intervals.iter().zip(binned.bins.iter()) {
                let label = interval.label();
                match bin.describe(var) {
                    Ok(d) => {
                        text.push_str(&report::render_distribution(
                            &d,
                            &format!("{var}, bin {label}"),
                        ));
                        text.push('\n');
                        bin_values.push(json!({
                            "bin": label,
                            "distribution": jsonout::distribution_json(&d),
                        }));
                    }
                    Err(_) => {
                        text.push_str(&format!("{var}, bin {label}: no data\n\n"));
                        bin_values.push(json!({ "bin": label, "distribution": Value::Null }));
                    }
                }
            }
        }
        blocks.push(json!({
            "variable": var,
            "overall": jsonout::distribution_json(&overall),
            "bins": bin_values,
        }));
    }
    let doc = json!({ "distributions": blocks });
    Ok(CommandOutput::new(text).with_file("describe.json", jsonout::to_pretty(&doc)))
}

// ---------------------------------------------------------------------------
// fit / elasticity

pub fn cmd_fit(cfg: &RunConfig) -> Result<CommandOutput> {
    let ds = load_data(cfg)?;
    let spec = cfg.model_spec()?;
    let level = cfg.level()?;
    let fit = mle::fit(&spec, &ds, &cfg.optimizer()).map_err(CliError::Core)?;
    let text = report::render_fit(&fit, level);
    let doc = jsonout::fit_json(&fit, level);
    Ok(CommandOutput::new(text).with_file("fit.json", jsonout::to_pretty(&doc)))
}

pub fn cmd_elasticity(cfg: &RunConfig) -> Result<CommandOutput> {
    let ds = load_data(cfg)?;
    let spec = cfg.model_spec()?;
    let level = cfg.level()?;
    let focal = cfg
        .focal
        .as_ref()
        .ok_or_else(|| CliError::config("`elasticity` needs a `focal` variable list"))?;
    let fit = mle::fit(&spec, &ds, &cfg.optimizer()).map_err(CliError::Core)?;

    let mut text = report::render_fit(&fit, level);
    let mut docs = Vec::new();
    for var in focal {
        let report = averaged_elasticities(&spec, &ds, &fit, var).map_err(CliError::Core)?;
        text.push_str(&format!("\naveraged elasticities of {var} (n = {})\n", report.n_averaged));
        for oe in &report.per_outcome {
            text.push_str(&format!(
                "  {}: direct {}  cross {}\n",
                oe.outcome,
                report::fmt_coef(oe.direct),
                report::fmt_coef(oe.cross),
            ));
        }
        docs.push(jsonout::elasticity_json(&report));
    }
    let doc = json!({ "fit": jsonout::fit_json(&fit, level), "elasticities": docs });
    Ok(CommandOutput::new(text).with_file("elasticity.json", jsonout::to_pretty(&doc)))
}

// ---------------------------------------------------------------------------
// select / probe

fn procedure_of(cfg: &RunConfig) -> Result<&str> {
    let p = cfg.procedure.as_deref().unwrap_or("auto");
    match p {
        "A" | "B" | "auto" => Ok(p),
        other => Err(CliError::config(format!(
            "unknown procedure `{other}` (expected A, B or auto)"
        ))),
    }
}

/// Run the configured stepwise procedure; `auto` is procedure A with a
/// fallback to B when the initial all-variable fit is not estimable.
fn run_selection(cfg: &RunConfig, ds: &Dataset) -> Result<SelectionResult> {
    let model = cfg.model_spec()?;
    let candidates = cfg
        .candidates
        .clone()
        .ok_or_else(|| CliError::config("selection needs a `candidates` variable list"))?;
    let forced = cfg.forced.clone().unwrap_or_default();
    let selection_cfg = cfg.selection_config()?;
    let run = |procedure| {
        run_procedure(
            procedure,
            ds,
            &model.outcome,
            model.levels.clone(),
            &candidates,
            &forced,
            &selection_cfg,
        )
    };
    match procedure_of(cfg)? {
        "A" => run(Procedure::A).map_err(CliError::Core),
        "B" => run(Procedure::B).map_err(CliError::Core),
        _ => match run(Procedure::A) {
            Ok(result) => Ok(result),
            Err(e) => {
                logging::info(format!("procedure A not estimable ({e}); falling back to B"));
                run(Procedure::B).map_err(CliError::Core)
            }
        },
    }
}

pub fn cmd_select(cfg: &RunConfig) -> Result<CommandOutput> {
    let ds = load_data(cfg)?;
    let level = cfg.level()?;
    let result = run_selection(cfg, &ds)?;
    let mut text = format!(
        "procedure {:?}: AIC-optimal AIC {:.4} ({} terms), final AIC {:.4} ({} terms){}\n\n",
        result.procedure,
        result.aic_optimal.aic,
        result.aic_optimal_terms.len(),
        result.final_fit.aic,
        result.final_terms.len(),
        if result.search_converged {
            ""
        } else {
            " [search stopped at best AIC seen]"
        },
    );
    text.push_str(&report::render_fit(&result.final_fit, level));
    let doc = jsonout::selection_json(&result, level);
    Ok(CommandOutput::new(text)
        .with_file("selection.json", jsonout::to_pretty(&doc))
        .with_file("trace.jsonl", jsonout::trace_jsonl(&result.trace)))
}

pub fn cmd_probe(cfg: &RunConfig) -> Result<CommandOutput> {
    let ds = load_data(cfg)?;
    let focal = cfg
        .focal
        .as_ref()
        .ok_or_else(|| CliError::config("`probe` needs a `focal` variable list"))?;
    let result = run_selection(cfg, &ds)?;
    let optimizer = cfg.optimizer();
    let mut text = String::new();
    let mut docs = Vec::new();
    for var in focal {
        match result.probe_variable(&ds, var, &optimizer) {
            Ok(cells) => {
                for cell in &cells {
                    let rendered = FocalCell {
                        coefficient: cell.coefficient,
                        t_ratio: cell.t_ratio,
                        probe: true,
                        elasticity: None,
                    }
                    .coefficient_text();
                    text.push_str(&format!("{var} ({}): {rendered}\n", cell.outcome));
                    docs.push(json!({
                        "variable": var,
                        "outcome": cell.outcome,
                        "coefficient": cell.coefficient,
                        "t_ratio": cell.t_ratio,
                        "rendered": rendered,
                    }));
                }
            }
            Err(e) => {
                text.push_str(&format!("{var}: not probed ({e})\n"));
                docs.push(json!({ "variable": var, "error": e.to_string() }));
            }
        }
    }
    let doc = json!({ "probes": docs });
    Ok(CommandOutput::new(text).with_file("probe.json", jsonout::to_pretty(&doc)))
}

// ---------------------------------------------------------------------------
// lrtest / tests

pub fn cmd_lrtest(
    cfg: &RunConfig,
    ll_pooled: Option<f64>,
    ll_bins_sum: Option<f64>,
    m: Option<usize>,
    k: Option<usize>,
    kind: &str,
) -> Result<CommandOutput> {
    let level = cfg.level()?;
    if let Some(path) = &cfg.fixtures {
        let doc = FixturesDoc::load(path)?;
        let report = replay(&doc, level);
        return Ok(CommandOutput::new(replay_text(&report))
            .with_file("replay.json", jsonout::to_pretty(&replay_json(&report))));
    }
    let (Some(ll_pooled), Some(ll_bins_sum), Some(m), Some(k)) = (ll_pooled, ll_bins_sum, m, k)
    else {
        return Err(CliError::config(
            "`lrtest` needs either --fixtures or all of --ll-pooled, --ll-bins-sum, --m, --k",
        ));
    };
    let lr = lr_test_from_sums(ll_pooled, ll_bins_sum, m, k, level).map_err(CliError::Core)?;
    let conclusion = match kind {
        "pooling" => if lr.reject {
            PoolingConclusion::Separately
        } else {
            PoolingConclusion::Together
        }
        .as_str()
        .to_string(),
        "bins" => if lr.reject {
            EffectConclusion::Effect
        } else {
            EffectConclusion::NoEffect
        }
        .as_str()
        .to_string(),
        other => {
            return Err(CliError::config(format!(
                "unknown test kind `{other}` (expected pooling or bins)"
            )))
        }
    };
    let text = format!(
        "statistic {:.4}, df {}, p {} -> {}\n",
        lr.statistic,
        lr.df,
        report::fmt_pvalue(lr.p_value),
        conclusion,
    );
    let doc = jsonout::lr_json(&lr, &conclusion);
    Ok(CommandOutput::new(text).with_file("lrtest.json", jsonout::to_pretty(&doc)))
}

pub fn cmd_tests(cfg: &RunConfig) -> Result<CommandOutput> {
    let level = cfg.level()?;
    if let Some(path) = &cfg.fixtures {
        let doc = FixturesDoc::load(path)?;
        let report = replay(&doc, level);
        return Ok(CommandOutput::new(replay_text(&report))
            .with_file("replay.json", jsonout::to_pretty(&replay_json(&report))));
    }

    let model = cfg.model_spec()?;
    if model.levels.len() > 2 && cfg.bins.is_none() {
        return Err(CliError::config(
            "severity-style models need a `bins` section for the bin-structure test",
        ));
    }
    let ds = load_data(cfg)?;
    let optimizer = cfg.optimizer();
    let mut rows = Vec::new();
    let mut docs = Vec::new();

    if cfg.split.is_some() {
        let split = cfg.split_rule()?;
        let test =
            pooling_test(&model, &ds, &split, &optimizer, level).map_err(CliError::Core)?;
        let conclusion = test.conclusion.as_str().to_string();
        docs.push(json!({
            "test": "pooling",
            "split_variable": split.variable,
            "result": jsonout::lr_json(&test.lr, &conclusion),
        }));
        rows.push(LrTableRow {
            label: format!("pooling by {}", split.variable),
            conclusion: match test.conclusion {
                PoolingConclusion::Together => "Car = SUV".to_string(),
                PoolingConclusion::Separately => "Car != SUV".to_string(),
            },
            lr: test.lr,
        });
    }

    if cfg.bins.is_some() {
        let bins = cfg.binning_spec()?;
        let selection = run_selection(cfg, &ds)?;
        let final_spec = selection.final_spec();
        let merge = cfg.merge_small_bins.unwrap_or(true);
        let test = bin_structure_test(&final_spec, &ds, &bins, &optimizer, level, merge)
            .map_err(CliError::Core)?;
        let conclusion = test.conclusion.as_str().to_string();
        docs.push(json!({
            "test": "bin_structure",
            "binning_variable": bins.variable,
            "removed": test.removed.iter().map(|r| json!({
                "variable": r.variable, "reason": r.reason,
            })).collect::<Vec<_>>(),
            "dropped_empty_bins": test.dropped_empty_bins,
            "merged_bins": test.merged_bins,
            "result": jsonout::lr_json(&test.lr, &conclusion),
        }));
        rows.push(LrTableRow {
            label: format!("bins of {}", bins.variable),
            conclusion: if test.lr.reject {
                "SL effect".to_string()
            } else {
                String::new()
            },
            lr: test.lr,
        });
    }

    if rows.is_empty() {
        return Err(CliError::config(
            "`tests` needs a `split` section, a `bins` section, or --fixtures",
        ));
    }
    let text = report::render_lr_table(&rows);
    let doc = json!({ "tests": docs });
    Ok(CommandOutput::new(text).with_file("tests.json", jsonout::to_pretty(&doc)))
}

// ---------------------------------------------------------------------------
// grid

struct GridRowOutcome {
    key: PartitionKey,
    n_rows: usize,
    result: std::result::Result<GridRowOk, String>,
}

struct GridRowOk {
    procedure: Procedure,
    selection: SelectionResult,
    cells: Vec<FocalCellDoc>,
}

struct FocalCellDoc {
    variable: String,
    outcome: String,
    block: usize,
    coefficient: f64,
    t_ratio: f64,
    probe: bool,
    elasticity: Option<(f64, f64)>,
}

/// One partition's table row: select, probe the focal variables, attach
/// elasticities of significant continuous focal coefficients.
fn grid_row(
    cfg: &RunConfig,
    model: &ModelSpec,
    key: &PartitionKey,
    data: &Dataset,
    focal: &[String],
) -> GridRowOutcome {
    let n_rows = data.n_rows();
    let attempt = || -> Result<GridRowOk> {
        let mut local = cfg.clone();
        local.procedure = Some(cfg.procedure.clone().unwrap_or_else(|| "auto".into()));
        let selection = run_selection(&local, data)?;
        let procedure = selection.procedure;
        let final_spec = selection.final_spec();
        let optimizer = cfg.optimizer();

        let mut cells = Vec::new();
        for var in focal {
            let kind = data.schema().get(var).map_err(CliError::Core)?.kind;
            let quantitative = kind == VariableKind::Quantitative;
            let elasticity = if quantitative
                && final_spec
                    .blocks
                    .iter()
                    .any(|b| b.terms.contains(var))
            {
                averaged_elasticities(&final_spec, data, &selection.final_fit, var).ok()
            } else {
                None
            };
            let n_blocks = model.levels.len() - 1;
            for block in 0..n_blocks {
                let term = Term::new(block, var.clone());
                let outcome = model.levels[block].label.clone();
                if selection.final_terms.contains(&term) {
                    let idx = selection
                        .final_fit
                        .param_index(&outcome, var)
                        .expect("final term has a coefficient");
                    let e = elasticity.as_ref().and_then(|r| {
                        r.per_outcome
                            .iter()
                            .find(|oe| oe.block == block)
                            .map(|oe| (oe.direct, oe.cross))
                    });
                    cells.push(FocalCellDoc {
                        variable: var.clone(),
                        outcome,
                        block,
                        coefficient: selection.final_fit.beta[idx],
                        t_ratio: selection.final_fit.t_ratios[idx],
                        probe: false,
                        elasticity: e,
                    });
                } else if selection.aic_optimal_terms.contains(&term) {
                    // Present at the AIC optimum but dropped as insignificant:
                    // report its AIC-optimal coefficient in brackets.
                    let idx = selection
                        .aic_optimal
                        .param_index(&outcome, var)
                        .expect("aic-optimal term has a coefficient");
                    cells.push(FocalCellDoc {
                        variable: var.clone(),
                        outcome,
                        block,
                        coefficient: selection.aic_optimal.beta[idx],
                        t_ratio: selection.aic_optimal.t_ratios[idx],
                        probe: true,
                        elasticity: None,
                    });
                }
            }
            // Blocks missing from the AIC optimum: test-add the variable.
            let missing: Vec<usize> = (0..n_blocks)
                .filter(|b| {
                    let term = Term::new(*b, var.clone());
                    !selection.aic_optimal_terms.contains(&term)
                        && !selection.final_terms.contains(&term)
                })
                .collect();
            if !missing.is_empty() {
                match selection.probe_variable(data, var, &optimizer) {
                    Ok(probe_cells) => {
                        for cell in probe_cells {
                            cells.push(FocalCellDoc {
                                variable: var.clone(),
                                outcome: cell.outcome,
                                block: cell.term.block,
                                coefficient: cell.coefficient,
                                t_ratio: cell.t_ratio,
                                probe: true,
                                elasticity: None,
                            });
                        }
                    }
                    Err(e) => {
                        logging::debug(format!(
                            "probe of `{var}` failed in {}: {e}",
                            key.label()
                        ));
                    }
                }
            }
        }
        cells.sort_by(|a, b| (&a.variable, a.block).cmp(&(&b.variable, b.block)));
        Ok(GridRowOk {
            procedure,
            selection,
            cells,
        })
    };
    GridRowOutcome {
        key: key.clone(),
        n_rows,
        result: attempt().map_err(|e| e.to_string()),
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn cmd_grid(cfg: &RunConfig) -> Result<CommandOutput> {
    let ds = load_data(cfg)?;
    let model = cfg.model_spec()?;
    let level = cfg.level()?;
    let taxonomy = cfg.taxonomy()?;
    let focal = cfg.focal.clone().unwrap_or_default();
    // Validate candidates early so a typo fails at exit code 2.
    let candidates = cfg
        .candidates
        .as_ref()
        .ok_or_else(|| CliError::config("`grid` needs a `candidates` variable list"))?;
    for c in candidates.iter().chain(focal.iter()) {
        ds.schema().get(c).map_err(CliError::Core)?;
    }

    let partitions = ds.partition(&taxonomy).map_err(CliError::Core)?;
    logging::info(format!(
        "{} partitions, {} unmodeled rows",
        partitions.parts.len(),
        partitions.unmodeled.n_rows()
    ));
    let jobs = cfg
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcomes = parallel_map(&partitions.parts, jobs, |(key, data)| {
        grid_row(cfg, &model, key, data, &focal)
    });

    let labels = outcome_labels(&model);
    let non_base = &labels[..labels.len() - 1];
    let mut table_rows = Vec::new();
    let mut json_rows = Vec::new();
    let mut files: Vec<(String, String)> = Vec::new();
    for (i, outcome) in outcomes.iter().enumerate() {
        match &outcome.result {
            Ok(ok) => {
                // Table cells: first focal variable only (the table is about
                // the focal effect; remaining variables live in the JSON).
                let cells: Vec<Option<FocalCell>> = (0..non_base.len())
                    .map(|block| {
                        focal.first().and_then(|var| {
                            ok.cells
                                .iter()
                                .find(|c| c.variable == *var && c.block == block)
                                .map(|c| FocalCell {
                                    coefficient: c.coefficient,
                                    t_ratio: c.t_ratio,
                                    probe: c.probe,
                                    elasticity: c.elasticity,
                                })
                        })
                    })
                    .collect();
                table_rows.push(ModelTableRow {
                    road_class: outcome.key.road_class.clone(),
                    area: outcome.key.area.clone(),
                    accident_type: outcome.key.accident_type.clone(),
                    fit_summary: Some((
                        ok.selection.final_fit.ll,
                        ok.selection.final_fit.ll_restricted,
                        ok.selection.final_fit.rho2,
                    )),
                    cells,
                    status: None,
                });
                json_rows.push(json!({
                    "partition": {
                        "road_class": outcome.key.road_class,
                        "area": outcome.key.area,
                        "accident_type": outcome.key.accident_type,
                    },
                    "status": "ok",
                    "n_rows": outcome.n_rows,
                    "procedure": match ok.procedure {
                        Procedure::A => "A",
                        Procedure::B => "B",
                    },
                    "search_converged": ok.selection.search_converged,
                    "fit": jsonout::fit_json(&ok.selection.final_fit, level),
                    "aic_optimal_aic": ok.selection.aic_optimal.aic,
                    "focal": ok.cells.iter().map(|c| json!({
                        "variable": c.variable,
                        "outcome": c.outcome,
                        "coefficient": c.coefficient,
                        "t_ratio": c.t_ratio,
                        "probe": c.probe,
                        "elasticity": c.elasticity.map(|(direct, cross)| json!({
                            "direct": direct, "cross": cross,
                        })),
                    })).collect::<Vec<_>>(),
                }));
                files.push((
                    format!("trace_{:03}_{}.jsonl", i + 1, sanitize(&outcome.key.label())),
                    jsonout::trace_jsonl(&ok.selection.trace),
                ));
            }
            Err(reason) => {
                table_rows.push(ModelTableRow {
                    road_class: outcome.key.road_class.clone(),
                    area: outcome.key.area.clone(),
                    accident_type: outcome.key.accident_type.clone(),
                    fit_summary: None,
                    cells: Vec::new(),
                    status: Some(reason.clone()),
                });
                json_rows.push(json!({
                    "partition": {
                        "road_class": outcome.key.road_class,
                        "area": outcome.key.area,
                        "accident_type": outcome.key.accident_type,
                    },
                    "status": "skipped",
                    "reason": reason,
                    "n_rows": outcome.n_rows,
                }));
            }
        }
    }

    let text = report::render_causation_table(&table_rows, non_base);
    let doc = json!({
        "rows": json_rows,
        "unmodeled_rows": partitions.unmodeled.n_rows(),
    });
    let mut output = CommandOutput::new(text).with_file("grid.json", jsonout::to_pretty(&doc));
    output.files.extend(files);
    Ok(output)
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    n: usize,
    seed: u64,
    outcome: String,
    levels: Vec<crate::config::LevelDoc>,
    covariates: Vec<CovariateDoc>,
    beta: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovariateDoc {
    name: String,
    distribution: DistributionDoc,
    #[serde(default)]
    missing_rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DistributionDoc {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    Bernoulli { p: f64 },
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<CommandOutput> {
    let raw = cfg
        .generator
        .as_ref()
        .ok_or_else(|| CliError::config("`simulate` needs a `generator` section"))?;
    let doc: GeneratorDoc = serde_json::from_value(raw.clone())
        .map_err(|e| CliError::config(format!("invalid `generator` section: {e}")))?;
    let spec = GeneratorSpec {
        n: doc.n,
        seed: cfg.seed.unwrap_or(doc.seed),
        covariates: doc
            .covariates
            .into_iter()
            .map(|c| CovariateSpec {
                name: c.name,
                distribution: match c.distribution {
                    DistributionDoc::Normal { mean, sd } => {
                        CovariateDistribution::Normal { mean, sd }
                    }
                    DistributionDoc::Uniform { lo, hi } => {
                        CovariateDistribution::Uniform { lo, hi }
                    }
                    DistributionDoc::Bernoulli { p } => CovariateDistribution::Bernoulli { p },
                },
                missing_rate: c.missing_rate,
            })
            .collect(),
        outcome: doc.outcome,
        levels: doc
            .levels
            .iter()
            .map(|l| OutcomeLevel::new(l.label.clone(), l.value))
            .collect(),
        beta: doc.beta,
    };
    let ds = generate(&spec).map_err(CliError::Core)?;
    let delimiter = cfg.delimiter.unwrap_or(',');
    let csv_text = write_csv(&ds, delimiter);
    let schema_doc = crate::schema::doc_from_core(ds.schema());
    let schema_text = {
        let mut s = serde_json::to_string_pretty(&schema_doc).expect("schema serializes");
        s.push('\n');
        s
    };
    let metadata = json!({
        "rng": choicefit_core::rng::ALGORITHM,
        "seed": spec.seed,
        "n": spec.n,
        "provenance": ds.provenance(),
    });
    let text = format!(
        "generated {} rows x {} columns (rng {}, seed {})\n",
        ds.n_rows(),
        ds.schema().len(),
        choicefit_core::rng::ALGORITHM,
        spec.seed,
    );
    Ok(CommandOutput::new(text)
        .with_file("data.csv", csv_text)
        .with_file("schema.json", schema_text)
        .with_file("metadata.json", jsonout::to_pretty(&metadata)))
}
