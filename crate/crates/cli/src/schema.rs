//! JSON schema documents describing a dataset's variables.
//!
//! ```json
//! {
//!   "variables": [
//!     { "name": "x29", "kind": "quantitative", "description": "posted speed limit" },
//!     { "name": "x33", "kind": "indicator" },
//!     { "name": "severity", "kind": "categorical",
//!       "levels": [ { "value": 0, "label": "pdo" }, { "value": 1, "label": "injury" } ] },
//!     { "name": "young", "kind": "derived_indicator", "base": "x34",
//!       "predicate": { "lt": 25 } }
//!   ]
//! }
//! ```
//!
//! Predicates compare one base variable against constants: `lt`, `le`, `gt`,
//! `ge`, `eq`, `in`, and the combinators `all`, `any`, `not`.

use crate::error::{CliError, Result};
use choicefit_core::dataset::{Predicate, Schema, VariableKind, VariableSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Schema document shipped with the binary: the crash-record variable list
/// (weather, light, junction, vehicle codes, speed limit, driver age, ...)
/// with its derived indicators, usable as a starting point for real data.
pub const DEFAULT_SCHEMA_JSON: &str = include_str!("../assets/crash_schema.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaDoc {
    pub variables: Vec<VariableDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<PredicateDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelDoc {
    pub value: f64,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateDoc {
    Lt(f64),
    Le(f64),
    Gt(f64),
    Ge(f64),
    Eq(f64),
    In(Vec<f64>),
    All(Vec<PredicateDoc>),
    Any(Vec<PredicateDoc>),
    Not(Box<PredicateDoc>),
}

impl PredicateDoc {
    fn to_core(&self) -> Result<Predicate> {
        Ok(match self {
            PredicateDoc::Lt(c) => Predicate::Lt(*c),
            PredicateDoc::Le(c) => Predicate::Le(*c),
            PredicateDoc::Gt(c) => Predicate::Gt(*c),
            PredicateDoc::Ge(c) => Predicate::Ge(*c),
            PredicateDoc::Eq(c) => Predicate::Eq(*c),
            PredicateDoc::In(values) => Predicate::In(values.clone()),
            PredicateDoc::All(parts) => combine(parts, true)?,
            PredicateDoc::Any(parts) => combine(parts, false)?,
            PredicateDoc::Not(inner) => Predicate::Not(Box::new(inner.to_core()?)),
        })
    }
}

fn combine(parts: &[PredicateDoc], conjunction: bool) -> Result<Predicate> {
    if parts.len() < 2 {
        return Err(CliError::config(
            "predicate combinators `all`/`any` need at least two parts",
        ));
    }
    let mut iter = parts.iter();
    let mut acc = iter.next().unwrap().to_core()?;
    for part in iter {
        let rhs = part.to_core()?;
        acc = if conjunction {
            Predicate::All(Box::new(acc), Box::new(rhs))
        } else {
            Predicate::Any(Box::new(acc), Box::new(rhs))
        };
    }
    Ok(acc)
}

impl SchemaDoc {
    pub fn parse(text: &str, origin: &str) -> Result<SchemaDoc> {
        serde_json::from_str(text).map_err(|e| CliError::json(origin, e))
    }

    pub fn load(path: &Path) -> Result<SchemaDoc> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        SchemaDoc::parse(&text, &path.display().to_string())
    }

    pub fn embedded_default() -> SchemaDoc {
        SchemaDoc::parse(DEFAULT_SCHEMA_JSON, "embedded default schema")
            .expect("embedded schema parses")
    }

    /// Compile into the core schema, validating kinds and derivations.
    pub fn to_core(&self) -> Result<Schema> {
        let mut vars = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let spec = match v.kind.as_str() {
                "quantitative" => VariableSpec::quantitative(v.name.clone()),
                "indicator" => VariableSpec::indicator(v.name.clone()),
                "categorical" => {
                    if v.levels.is_empty() {
                        return Err(CliError::config(format!(
                            "categorical variable `{}` declares no levels",
                            v.name
                        )));
                    }
                    VariableSpec::categorical(
                        v.name.clone(),
                        v.levels.iter().map(|l| (l.value, l.label.clone())).collect(),
                    )
                }
                "derived_indicator" => {
                    let base = v.base.as_ref().ok_or_else(|| {
                        CliError::config(format!(
                            "derived indicator `{}` needs a `base` variable",
                            v.name
                        ))
                    })?;
                    let predicate = v.predicate.as_ref().ok_or_else(|| {
                        CliError::config(format!(
                            "derived indicator `{}` needs a `predicate`",
                            v.name
                        ))
                    })?;
                    VariableSpec::derived(v.name.clone(), base.clone(), predicate.to_core()?)
                }
                other => {
                    return Err(CliError::config(format!(
                        "variable `{}` has unknown kind `{other}`",
                        v.name
                    )))
                }
            };
            let spec = match &v.description {
                Some(d) => spec.with_description(d.clone()),
                None => spec,
            };
            vars.push(spec);
        }
        Schema::new(vars).map_err(CliError::Core)
    }
}

/// Schema document for an existing core schema (used by `simulate` to write
/// the schema next to the generated CSV).
pub fn doc_from_core(schema: &Schema) -> SchemaDoc {
    SchemaDoc {
        variables: schema
            .variables()
            .iter()
            .map(|v| VariableDoc {
                name: v.name.clone(),
                kind: match v.kind {
                    VariableKind::Quantitative => "quantitative",
                    VariableKind::Indicator => "indicator",
                    VariableKind::DerivedIndicator => "derived_indicator",
                    VariableKind::Categorical => "categorical",
                }
                .to_string(),
                description: if v.description.is_empty() {
                    None
                } else {
                    Some(v.description.clone())
                },
                levels: v
                    .levels
                    .iter()
                    .map(|(value, label)| LevelDoc {
                        value: *value,
                        label: label.clone(),
                    })
                    .collect(),
                base: v.derivation.as_ref().map(|d| d.base.clone()),
                // Derivations are compiled one way; datasets written by
                // `simulate` never contain derived columns.
                predicate: None,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_schema_compiles() {
        let doc = SchemaDoc::embedded_default();
        let schema = doc.to_core().unwrap();
        assert!(schema.get("x29").is_ok());
        assert!(schema.get("unsafe_speed_cause").is_ok());
        assert!(schema.get("severity").is_ok());
    }

    #[test]
    fn interval_predicate_round_trips() {
        let doc = SchemaDoc::parse(
            r#"{ "variables": [
                { "name": "x", "kind": "quantitative" },
                { "name": "mid", "kind": "derived_indicator", "base": "x",
                  "predicate": { "all": [ { "gt": 30 }, { "le": 50 } ] } }
            ]}"#,
            "test",
        )
        .unwrap();
        let schema = doc.to_core().unwrap();
        let spec = schema.get("mid").unwrap();
        let p = &spec.derivation.as_ref().unwrap().predicate;
        assert!(p.eval(50.0));
        assert!(!p.eval(30.0));
    }

    #[test]
    fn unknown_kind_is_a_config_error() {
        let doc = SchemaDoc::parse(
            r#"{ "variables": [ { "name": "x", "kind": "mystery" } ] }"#,
            "test",
        )
        .unwrap();
        assert!(matches!(doc.to_core(), Err(CliError::Config(_))));
    }
}
