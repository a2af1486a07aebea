//! Run configuration: one JSON document, with command-line flags taking
//! precedence over file values.

use crate::error::{CliError, Result};
use choicefit_core::dataset::{BinningSpec, PartitionKey, PartitionRule, Taxonomy};
use choicefit_core::inference::SplitRule;
use choicefit_core::logit::{BlockSpec, ModelSpec, OutcomeLevel};
use choicefit_core::mle::OptimizerConfig;
use choicefit_core::selection::SelectionConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub delimiter: Option<char>,
    #[serde(default)]
    pub missing_tokens: Option<Vec<String>>,
    #[serde(default)]
    pub strict: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub level: Option<f64>,
    /// "A", "B" or "auto" (A with fallback to B).
    #[serde(default)]
    pub procedure: Option<String>,
    #[serde(default)]
    pub optimizer: Option<OptimizerDoc>,
    #[serde(default)]
    pub selection: Option<SelectionDoc>,
    #[serde(default)]
    pub model: Option<ModelDoc>,
    #[serde(default)]
    pub candidates: Option<Vec<String>>,
    #[serde(default)]
    pub forced: Option<Vec<String>>,
    #[serde(default)]
    pub focal: Option<Vec<String>>,
    /// Variables whose percentage distributions `describe` reports.
    #[serde(default)]
    pub describe: Option<Vec<String>>,
    #[serde(default)]
    pub bins: Option<BinsDoc>,
    #[serde(default)]
    pub partitions: Option<Vec<PartitionDoc>>,
    #[serde(default)]
    pub split: Option<SplitDoc>,
    #[serde(default)]
    pub merge_small_bins: Option<bool>,
    #[serde(default)]
    pub generator: Option<serde_json::Value>,
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerDoc {
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub gradient_tolerance: Option<f64>,
    #[serde(default)]
    pub step_halving_limit: Option<u32>,
    #[serde(default)]
    pub divergence_bound: Option<f64>,
    #[serde(default)]
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionDoc {
    #[serde(default)]
    pub refresh_cadence: Option<usize>,
    #[serde(default)]
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub outcome: String,
    pub levels: Vec<LevelDoc>,
    /// Shared covariate list (one list for every non-base outcome) ...
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    /// ... or one list per non-base outcome.
    #[serde(default)]
    pub blocks: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub intercept: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelDoc {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsDoc {
    pub variable: String,
    pub edges: Vec<f64>,
    #[serde(default)]
    pub unbounded_tail: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDoc {
    pub road_class: String,
    pub area: String,
    pub accident_type: String,
    /// Conjunction of `variable -> allowed values`.
    #[serde(rename = "where")]
    pub conditions: std::collections::BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitDoc {
    pub variable: String,
    pub groups: Vec<SplitGroupDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitGroupDoc {
    pub label: String,
    pub values: Vec<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(path.display().to_string(), e))
    }

    pub fn level(&self) -> Result<f64> {
        let level = self.level.unwrap_or(0.05);
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::config(format!(
                "significance level {level} is outside (0, 1)"
            )));
        }
        Ok(level)
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::default();
        if let Some(doc) = &self.optimizer {
            if let Some(v) = doc.max_iterations {
                cfg.max_iterations = v;
            }
            if let Some(v) = doc.gradient_tolerance {
                cfg.gradient_tolerance = v;
            }
            if let Some(v) = doc.step_halving_limit {
                cfg.step_halving_limit = v;
            }
            if let Some(v) = doc.divergence_bound {
                cfg.divergence_bound = v;
            }
            if let Some(v) = doc.ridge {
                cfg.ridge = v;
            }
        }
        cfg
    }

    pub fn selection_config(&self) -> Result<SelectionConfig> {
        let mut cfg = SelectionConfig {
            level: self.level()?,
            optimizer: self.optimizer(),
            ..SelectionConfig::default()
        };
        if let Some(doc) = &self.selection {
            if let Some(v) = doc.refresh_cadence {
                cfg.refresh_cadence = v;
            }
            if let Some(v) = doc.max_rounds {
                cfg.max_rounds = v;
            }
        }
        Ok(cfg)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let doc = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a `model` section"))?;
        doc.to_core()
    }

    pub fn binning_spec(&self) -> Result<BinningSpec> {
        let doc = self
            .bins
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a `bins` section"))?;
        BinningSpec::from_edges(doc.variable.clone(), &doc.edges, doc.unbounded_tail)
            .map_err(CliError::Core)
    }

    pub fn taxonomy(&self) -> Result<Taxonomy> {
        let docs = self
            .partitions
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a `partitions` section"))?;
        let rules = docs
            .iter()
            .map(|d| PartitionRule {
                key: PartitionKey {
                    road_class: d.road_class.clone(),
                    area: d.area.clone(),
                    accident_type: d.accident_type.clone(),
                },
                conditions: d
                    .conditions
                    .iter()
                    .map(|(var, values)| (var.clone(), values.clone()))
                    .collect(),
            })
            .collect();
        Taxonomy::new(rules).map_err(CliError::Core)
    }

    pub fn split_rule(&self) -> Result<SplitRule> {
        let doc = self
            .split
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a `split` section"))?;
        Ok(SplitRule {
            variable: doc.variable.clone(),
            groups: doc
                .groups
                .iter()
                .map(|g| (g.label.clone(), g.values.clone()))
                .collect(),
        })
    }
}

impl ModelDoc {
    pub fn to_core(&self) -> Result<ModelSpec> {
        let levels: Vec<OutcomeLevel> = self
            .levels
            .iter()
            .map(|l| OutcomeLevel::new(l.label.clone(), l.value))
            .collect();
        if levels.len() < 2 {
            return Err(CliError::config(
                "a model needs at least two outcome levels (base last)",
            ));
        }
        let intercept = self.intercept.unwrap_or(true);
        let blocks: Vec<BlockSpec> = match (&self.variables, &self.blocks) {
            (Some(vars), None) => (0..levels.len() - 1)
                .map(|_| BlockSpec {
                    intercept,
                    terms: vars.clone(),
                })
                .collect(),
            (None, Some(lists)) => {
                if lists.len() != levels.len() - 1 {
                    return Err(CliError::config(format!(
                        "`blocks` must list {} per-outcome variable lists",
                        levels.len() - 1
                    )));
                }
                lists
                    .iter()
                    .map(|terms| BlockSpec {
                        intercept,
                        terms: terms.clone(),
                    })
                    .collect()
            }
            (None, None) => (0..levels.len() - 1)
                .map(|_| BlockSpec {
                    intercept,
                    terms: Vec::new(),
                })
                .collect(),
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "`model` takes either `variables` or `blocks`, not both",
                ))
            }
        };
        Ok(ModelSpec {
            outcome: self.outcome.clone(),
            levels,
            blocks,
        })
    }
}

/// Outcome labels as configured, for reporting.
pub fn outcome_labels(spec: &ModelSpec) -> Vec<String> {
    spec.levels.iter().map(|l| l.label.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{ "data": "d.csv" }"#).unwrap();
        assert_eq!(cfg.level().unwrap(), 0.05);
        let opt = cfg.optimizer();
        assert_eq!(opt.max_iterations, 200);
        assert_eq!(opt.gradient_tolerance, 1e-8);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{ "bogus": 1 }"#).is_err());
    }

    #[test]
    fn model_doc_builds_shared_blocks() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{ "model": { "outcome": "y",
                 "levels": [ {"label": "a", "value": 1}, {"label": "b", "value": 0} ],
                 "variables": ["x1", "x2"] } }"#,
        )
        .unwrap();
        let spec = cfg.model_spec().unwrap();
        assert_eq!(spec.blocks.len(), 1);
        assert_eq!(spec.blocks[0].terms, vec!["x1", "x2"]);
        assert!(spec.blocks[0].intercept);
    }

    #[test]
    fn invalid_level_is_rejected() {
        let cfg: RunConfig = serde_json::from_str(r#"{ "level": 1.5 }"#).unwrap();
        assert!(cfg.level().is_err());
    }

    #[test]
    fn per_outcome_blocks_and_intercept_suppression() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{ "model": { "outcome": "y",
                 "levels": [ {"label": "a", "value": 0}, {"label": "b", "value": 1}, {"label": "c", "value": 2} ],
                 "blocks": [["x1"], ["x2", "x3"]],
                 "intercept": false } }"#,
        )
        .unwrap();
        let spec = cfg.model_spec().unwrap();
        assert_eq!(spec.blocks.len(), 2);
        assert_eq!(spec.blocks[0].terms, vec!["x1"]);
        assert_eq!(spec.blocks[1].terms, vec!["x2", "x3"]);
        assert!(!spec.blocks[0].intercept);

        // Wrong block count and variables+blocks together are rejected.
        let bad: RunConfig = serde_json::from_str(
            r#"{ "model": { "outcome": "y",
                 "levels": [ {"label": "a", "value": 0}, {"label": "b", "value": 1} ],
                 "blocks": [["x1"], ["x2"]] } }"#,
        )
        .unwrap();
        assert!(bad.model_spec().is_err());
    }
}
