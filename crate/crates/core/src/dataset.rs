//! Tabular crash-style data: typed variables with explicit missing values,
//! derived indicators, partitioning by categorical keys and binning by a
//! quantitative variable.
//!
//! A [`Dataset`] is immutable once built; every operation returns a new
//! value, so datasets can be shared freely across workers.

use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

/// What a column means and which values it may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableKind {
    /// Finite real values.
    Quantitative,
    /// Exactly 0 or 1 (or missing).
    Indicator,
    /// 0/1 column computed from a base variable through a predicate.
    DerivedIndicator,
    /// Integer-coded values drawn from a declared level set.
    Categorical,
}

impl VariableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariableKind::Quantitative => "quantitative",
            VariableKind::Indicator => "indicator",
            VariableKind::DerivedIndicator => "derived-indicator",
            VariableKind::Categorical => "categorical",
        }
    }
}

/// Predicate over a single base variable. `All`/`Any` combine two predicates,
/// which covers interval conditions like `30 < x && x <= 50`.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Lt(f64),
    Le(f64),
    Gt(f64),
    Ge(f64),
    Eq(f64),
    In(Vec<f64>),
    All(alloc::boxed::Box<Predicate>, alloc::boxed::Box<Predicate>),
    Any(alloc::boxed::Box<Predicate>, alloc::boxed::Box<Predicate>),
    Not(alloc::boxed::Box<Predicate>),
}

impl Predicate {
    pub fn eval(&self, x: f64) -> bool {
        match self {
            Predicate::Lt(c) => x < *c,
            Predicate::Le(c) => x <= *c,
            Predicate::Gt(c) => x > *c,
            Predicate::Ge(c) => x >= *c,
            Predicate::Eq(c) => x == *c,
            Predicate::In(set) => set.contains(&x),
            Predicate::All(a, b) => a.eval(x) && b.eval(x),
            Predicate::Any(a, b) => a.eval(x) || b.eval(x),
            Predicate::Not(a) => !a.eval(x),
        }
    }
}

/// Recipe for a derived indicator: predicate applied to one base variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub base: String,
    pub predicate: Predicate,
}

/// One schema entry.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    /// Required for derived indicators, absent otherwise.
    pub derivation: Option<Derivation>,
    /// Declared `(code, label)` pairs for categorical variables.
    pub levels: Vec<(f64, String)>,
    pub description: String,
}

impl VariableSpec {
    pub fn quantitative(name: impl Into<String>) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Quantitative,
            derivation: None,
            levels: Vec::new(),
            description: String::new(),
        }
    }

    pub fn indicator(name: impl Into<String>) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Indicator,
            derivation: None,
            levels: Vec::new(),
            description: String::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, levels: Vec<(f64, String)>) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Categorical,
            derivation: None,
            levels,
            description: String::new(),
        }
    }

    pub fn derived(name: impl Into<String>, base: impl Into<String>, predicate: Predicate) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::DerivedIndicator,
            derivation: Some(Derivation {
                base: base.into(),
                predicate,
            }),
            levels: Vec::new(),
            description: String::new(),
        }
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }
}

/// Ordered list of variable specs with unique names.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    vars: Vec<VariableSpec>,
}

impl Schema {
    pub fn new(vars: Vec<VariableSpec>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable {
                    name: v.name.clone(),
                });
            }
            if v.kind == VariableKind::DerivedIndicator {
                let d = v.derivation.as_ref().ok_or_else(|| {
                    Error::InvalidSpec(format!("derived indicator `{}` lacks a derivation", v.name))
                })?;
                if !vars.iter().any(|w| w.name == d.base) {
                    return Err(Error::UnknownVariable {
                        name: d.base.clone(),
                    });
                }
            } else if v.derivation.is_some() {
                return Err(Error::InvalidSpec(format!(
                    "variable `{}` carries a derivation but is not a derived indicator",
                    v.name
                )));
            }
        }
        Ok(Schema { vars })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn get(&self, name: &str) -> Result<&VariableSpec> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable {
                name: name.to_string(),
            })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

/// Validate one cell against its variable spec.
fn check_value(spec: &VariableSpec, row: usize, value: f64) -> Result<()> {
    match spec.kind {
        VariableKind::Quantitative => {
            if !value.is_finite() {
                return Err(Error::InvalidValue {
                    row,
                    column: spec.name.clone(),
                    message: "quantitative value is not finite".into(),
                });
            }
        }
        VariableKind::Indicator | VariableKind::DerivedIndicator => {
            if value != 0.0 && value != 1.0 {
                return Err(Error::InvalidValue {
                    row,
                    column: spec.name.clone(),
                    message: format!("indicator value {value} is not 0 or 1"),
                });
            }
        }
        VariableKind::Categorical => {
            if !spec.levels.iter().any(|(code, _)| *code == value) {
                return Err(Error::InvalidValue {
                    row,
                    column: spec.name.clone(),
                    message: format!("value {value} is not a declared level"),
                });
            }
        }
    }
    Ok(())
}

/// Columnar table of optional values, one column per schema variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<Schema>,
    columns: Vec<Vec<Option<f64>>>,
    n_rows: usize,
    provenance: String,
}

impl Dataset {
    /// Empty dataset over a schema.
    pub fn new(schema: Schema, provenance: impl Into<String>) -> Self {
        let n = schema.len();
        Dataset {
            schema: Arc::new(schema),
            columns: vec![Vec::new(); n],
            n_rows: 0,
            provenance: provenance.into(),
        }
    }

    /// Build from columns ordered like the schema; validates every value.
    pub fn from_columns(
        schema: Schema,
        columns: Vec<Vec<Option<f64>>>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::Dimension {
                expected: schema.len(),
                got: columns.len(),
            });
        }
        let n_rows = columns.first().map_or(0, |c| c.len());
        for (spec, col) in schema.variables().iter().zip(columns.iter()) {
            if col.len() != n_rows {
                return Err(Error::Dimension {
                    expected: n_rows,
                    got: col.len(),
                });
            }
            for (row, v) in col.iter().enumerate() {
                if let Some(v) = v {
                    check_value(spec, row, *v)?;
                }
            }
        }
        Ok(Dataset {
            schema: Arc::new(schema),
            columns,
            n_rows,
            provenance: provenance.into(),
        })
    }

    /// Append one row (validated). Used by loaders and generators.
    pub fn push_row(&mut self, row: &[Option<f64>]) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::Dimension {
                expected: self.schema.len(),
                got: row.len(),
            });
        }
        for (spec, v) in self.schema.variables().iter().zip(row.iter()) {
            if let Some(v) = v {
                check_value(spec, self.n_rows, *v)?;
            }
        }
        for (col, v) in self.columns.iter_mut().zip(row.iter()) {
            col.push(*v);
        }
        self.n_rows += 1;
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        let idx = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable {
                name: name.to_string(),
            })?;
        Ok(&self.columns[idx])
    }

    fn select_rows(&self, keep: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|col| keep.iter().map(|&r| col[r]).collect())
            .collect();
        Dataset {
            schema: Arc::clone(&self.schema),
            columns,
            n_rows: keep.len(),
            provenance: self.provenance.clone(),
        }
    }

    /// Concatenate two datasets over the same schema, preserving row order.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.schema != other.schema {
            return Err(Error::InvalidSpec(
                "cannot concatenate datasets with different schemas".into(),
            ));
        }
        let columns = self
            .columns
            .iter()
            .zip(other.columns.iter())
            .map(|(a, b)| {
                let mut c = a.clone();
                c.extend_from_slice(b);
                c
            })
            .collect();
        Ok(Dataset {
            schema: Arc::clone(&self.schema),
            columns,
            n_rows: self.n_rows + other.n_rows,
            provenance: self.provenance.clone(),
        })
    }

    /// Append a derived indicator column: 1 where the predicate holds on the
    /// base value, 0 where it fails, missing where the base is missing.
    pub fn derive_indicator(&self, spec: &VariableSpec) -> Result<Dataset> {
        if spec.kind != VariableKind::DerivedIndicator {
            return Err(Error::KindMismatch {
                name: spec.name.clone(),
                expected: "a derived indicator",
            });
        }
        if self.schema.index_of(&spec.name).is_some() {
            return Err(Error::DuplicateVariable {
                name: spec.name.clone(),
            });
        }
        let derivation = spec
            .derivation
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec(format!("`{}` lacks a derivation", spec.name)))?;
        let base = self.column(&derivation.base)?;
        let derived: Vec<Option<f64>> = base
            .iter()
            .map(|v| v.map(|x| if derivation.predicate.eval(x) { 1.0 } else { 0.0 }))
            .collect();

        let mut vars = self.schema.vars.clone();
        vars.push(spec.clone());
        let mut columns = self.columns.clone();
        columns.push(derived);
        Ok(Dataset {
            schema: Arc::new(Schema { vars }),
            columns,
            n_rows: self.n_rows,
            provenance: self.provenance.clone(),
        })
    }

    /// Drop rows with a missing value in any of `vars`; also reports how many
    /// rows were removed.
    pub fn complete_cases(&self, vars: &[String]) -> Result<(Dataset, usize)> {
        let mut idxs = Vec::with_capacity(vars.len());
        for v in vars {
            idxs.push(self.schema.index_of(v).ok_or_else(|| Error::UnknownVariable {
                name: v.clone(),
            })?);
        }
        let keep: Vec<usize> = (0..self.n_rows)
            .filter(|&r| idxs.iter().all(|&c| self.columns[c][r].is_some()))
            .collect();
        let removed = self.n_rows - keep.len();
        Ok((self.select_rows(&keep), removed))
    }

    /// Rows whose value of `var` is one of `values` (missing rows excluded).
    pub fn filter_in(&self, var: &str, values: &[f64]) -> Result<Dataset> {
        let col = self.column(var)?;
        let keep: Vec<usize> = (0..self.n_rows)
            .filter(|&r| matches!(col[r], Some(v) if values.contains(&v)))
            .collect();
        Ok(self.select_rows(&keep))
    }

    /// Route rows into the taxonomy's partitions; rows matching no rule land
    /// in the `unmodeled` bucket.
    pub fn partition(&self, taxonomy: &Taxonomy) -> Result<Partitions> {
        for rule in &taxonomy.rules {
            for (var, _) in &rule.conditions {
                self.column(var)?;
            }
        }
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); taxonomy.rules.len()];
        let mut unmodeled = Vec::new();
        'rows: for r in 0..self.n_rows {
            for (b, rule) in taxonomy.rules.iter().enumerate() {
                let matches = rule.conditions.iter().all(|(var, values)| {
                    let col = self.schema.index_of(var).unwrap();
                    match self.columns[col][r] {
                        Some(v) => values.contains(&v),
                        None => false,
                    }
                });
                if matches {
                    buckets[b].push(r);
                    continue 'rows;
                }
            }
            unmodeled.push(r);
        }
        let parts = taxonomy
            .rules
            .iter()
            .zip(buckets.iter())
            .map(|(rule, rows)| (rule.key.clone(), self.select_rows(rows)))
            .collect();
        Ok(Partitions {
            parts,
            unmodeled: self.select_rows(&unmodeled),
        })
    }

    /// Split by a quantitative variable into the spec's half-open intervals.
    /// Rows with a missing binning value and rows outside every interval are
    /// counted separately, not binned.
    pub fn bin(&self, spec: &BinningSpec) -> Result<Binned> {
        let var = self.schema.get(&spec.variable)?;
        if var.kind != VariableKind::Quantitative {
            return Err(Error::KindMismatch {
                name: spec.variable.clone(),
                expected: "quantitative",
            });
        }
        let col = self.column(&spec.variable)?;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); spec.intervals.len()];
        let mut missing = 0usize;
        let mut out_of_range = 0usize;
        for (r, v) in col.iter().enumerate() {
            match v {
                None => missing += 1,
                Some(x) => match spec.interval_of(*x) {
                    Some(b) => buckets[b].push(r),
                    None => out_of_range += 1,
                },
            }
        }
        Ok(Binned {
            bins: buckets.iter().map(|rows| self.select_rows(rows)).collect(),
            intervals: spec.intervals.clone(),
            missing,
            out_of_range,
        })
    }

    /// Percentage distribution of an indicator or categorical variable over
    /// its non-missing rows.
    pub fn describe(&self, var: &str) -> Result<Distribution> {
        let spec = self.schema.get(var)?;
        let levels: Vec<(f64, String)> = match spec.kind {
            VariableKind::Indicator | VariableKind::DerivedIndicator => {
                vec![(0.0, "0".into()), (1.0, "1".into())]
            }
            VariableKind::Categorical => spec.levels.clone(),
            VariableKind::Quantitative => {
                return Err(Error::KindMismatch {
                    name: var.to_string(),
                    expected: "indicator or categorical",
                })
            }
        };
        let col = self.column(var)?;
        let mut counts = vec![0usize; levels.len()];
        let mut total = 0usize;
        for v in col.iter().flatten() {
            if let Some(i) = levels.iter().position(|(code, _)| code == v) {
                counts[i] += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(Error::AllMissing {
                name: var.to_string(),
            });
        }
        let shares = levels
            .into_iter()
            .zip(counts)
            .map(|((value, label), count)| CategoryShare {
                value,
                label,
                count,
                percent: 100.0 * count as f64 / total as f64,
            })
            .collect();
        Ok(Distribution {
            variable: var.to_string(),
            n: total,
            shares,
        })
    }
}

/// One partition cell of the road-class / area / accident-type grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionKey {
    pub road_class: String,
    pub area: String,
    pub accident_type: String,
}

impl PartitionKey {
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.road_class, self.area, self.accident_type)
    }
}

/// Conjunction of `variable in set` conditions routing rows to one key.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRule {
    pub key: PartitionKey,
    pub conditions: Vec<(String, Vec<f64>)>,
}

/// Validated, non-overlapping rule set.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    rules: Vec<PartitionRule>,
}

impl Taxonomy {
    /// Compile the rules, rejecting pairs that could both match one row.
    pub fn new(rules: Vec<PartitionRule>) -> Result<Self> {
        for (i, a) in rules.iter().enumerate() {
            for b in rules[..i].iter() {
                if rules_overlap(a, b) {
                    return Err(Error::InvalidSpec(format!(
                        "partition rules `{}` and `{}` overlap",
                        a.key.label(),
                        b.key.label()
                    )));
                }
            }
        }
        Ok(Taxonomy { rules })
    }

    pub fn rules(&self) -> &[PartitionRule] {
        &self.rules
    }
}

/// Two conjunction rules overlap unless some shared variable has disjoint
/// value sets. A variable constrained by only one rule never separates them.
fn rules_overlap(a: &PartitionRule, b: &PartitionRule) -> bool {
    for (var, va) in &a.conditions {
        if let Some((_, vb)) = b.conditions.iter().find(|(w, _)| w == var) {
            if !va.iter().any(|x| vb.contains(x)) {
                return false;
            }
        }
    }
    true
}

/// Result of routing a dataset through a taxonomy.
#[derive(Debug, Clone)]
pub struct Partitions {
    pub parts: Vec<(PartitionKey, Dataset)>,
    pub unmodeled: Dataset,
}

/// Half-open interval `[lo, hi)`; `hi = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && self.hi.is_none_or(|hi| x < hi)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(hi) => format!("[{},{})", self.lo, hi),
            None => format!("[{},inf)", self.lo),
        }
    }
}

/// Ordered disjoint intervals over one quantitative variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningSpec {
    pub variable: String,
    pub intervals: Vec<Interval>,
}

impl BinningSpec {
    pub fn new(variable: impl Into<String>, intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidSpec("binning needs at least one interval".into()));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if let Some(hi) = iv.hi {
                if !(iv.lo < hi) {
                    return Err(Error::InvalidSpec(format!(
                        "interval {} is empty or reversed",
                        iv.label()
                    )));
                }
            } else if i + 1 != intervals.len() {
                return Err(Error::InvalidSpec(
                    "only the final interval may be unbounded".into(),
                ));
            }
            if i > 0 {
                let prev = &intervals[i - 1];
                let prev_hi = prev.hi.ok_or_else(|| {
                    Error::InvalidSpec("only the final interval may be unbounded".into())
                })?;
                if iv.lo < prev_hi {
                    return Err(Error::InvalidSpec(format!(
                        "intervals {} and {} overlap or are out of order",
                        prev.label(),
                        iv.label()
                    )));
                }
            }
        }
        Ok(BinningSpec {
            variable: variable.into(),
            intervals,
        })
    }

    /// Contiguous bins from edges `e0 < e1 < ... < ek`, optionally followed by
    /// an unbounded `[ek, inf)` tail.
    pub fn from_edges(variable: impl Into<String>, edges: &[f64], unbounded_tail: bool) -> Result<Self> {
        if edges.len() < 2 && !(unbounded_tail && edges.len() == 1) {
            return Err(Error::InvalidSpec("need at least two bin edges".into()));
        }
        let mut intervals: Vec<Interval> = edges
            .windows(2)
            .map(|w| Interval {
                lo: w[0],
                hi: Some(w[1]),
            })
            .collect();
        if unbounded_tail {
            intervals.push(Interval {
                lo: *edges.last().unwrap(),
                hi: None,
            });
        }
        BinningSpec::new(variable, intervals)
    }

    pub fn interval_of(&self, x: f64) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.contains(x))
    }
}

/// Result of binning: one dataset per interval plus drop counts.
#[derive(Debug, Clone)]
pub struct Binned {
    pub bins: Vec<Dataset>,
    pub intervals: Vec<Interval>,
    /// Rows whose binning value was missing.
    pub missing: usize,
    /// Rows whose value fell outside every interval.
    pub out_of_range: usize,
}

/// Percentage distribution of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub variable: String,
    /// Non-missing rows the shares are computed over.
    pub n: usize,
    pub shares: Vec<CategoryShare>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryShare {
    pub value: f64,
    pub label: String,
    pub count: usize,
    pub percent: f64,
}
