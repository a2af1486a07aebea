//! Delimited-text loading with explicit missing values.
//!
//! Input is UTF-8 text with a header row. Every file-backed schema variable
//! must appear in the header; extra file columns are ignored. Cells are
//! trimmed; an empty cell or any configured sentinel token ("NA" by default)
//! is missing. Under the strict policy an unparseable or invalid cell is an
//! error with its row and column; under the lenient policy it becomes
//! missing. Derived indicator columns are computed after loading, in schema
//! order.

use crate::error::{CliError, Result};
use choicefit_core::dataset::{Dataset, Schema, VariableKind, VariableSpec};
use choicefit_core::Error as CoreError;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: char,
    pub missing_tokens: Vec<String>,
    /// Reject invalid cells instead of coercing them to missing.
    pub strict: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: ',',
            missing_tokens: vec![String::new(), "NA".to_string()],
            strict: true,
        }
    }
}

/// Load a dataset from a file.
pub fn load_dataset(path: &Path, schema: &Schema, options: &LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(path.display().to_string(), e))?;
    parse_dataset(&text, schema, options, &path.display().to_string())
}

/// Parse delimited text against a schema. `provenance` labels the source.
pub fn parse_dataset(
    text: &str,
    schema: &Schema,
    options: &LoadOptions,
    provenance: &str,
) -> Result<Dataset> {
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{provenance}: missing header row")))?;
    let header: Vec<&str> = header_line
        .split(options.delimiter)
        .map(str::trim)
        .collect();

    // File-backed variables (everything but derived indicators) must all be
    // present in the header.
    let file_vars: Vec<&VariableSpec> = schema
        .variables()
        .iter()
        .filter(|v| v.kind != VariableKind::DerivedIndicator)
        .collect();
    let mut positions = Vec::with_capacity(file_vars.len());
    for v in &file_vars {
        let pos = header.iter().position(|h| *h == v.name).ok_or_else(|| {
            CliError::config(format!(
                "{provenance}: schema variable `{}` not found in the header",
                v.name
            ))
        })?;
        positions.push(pos);
    }

    let base_schema = Schema::new(file_vars.iter().map(|v| (*v).clone()).collect())
        .map_err(CliError::Core)?;
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); file_vars.len()];
    for (line_no, line) in lines.enumerate() {
        let row_idx = line_no; // 0-based data row, matching core error reports
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(options.delimiter).map(str::trim).collect();
        for ((v, &pos), column) in file_vars.iter().zip(positions.iter()).zip(columns.iter_mut()) {
            let raw = cells.get(pos).copied().unwrap_or("");
            column.push(parse_cell(raw, v, row_idx, options)?);
        }
    }

    let mut ds = Dataset::from_columns(base_schema, columns, provenance).map_err(CliError::Core)?;

    // Apply derivations in schema order.
    for v in schema.variables() {
        if v.kind == VariableKind::DerivedIndicator {
            ds = ds.derive_indicator(v).map_err(CliError::Core)?;
        }
    }
    Ok(ds)
}

fn parse_cell(
    raw: &str,
    var: &VariableSpec,
    row: usize,
    options: &LoadOptions,
) -> Result<Option<f64>> {
    if options.missing_tokens.iter().any(|t| t == raw) {
        return Ok(None);
    }
    let invalid = |message: String| -> Result<Option<f64>> {
        if options.strict {
            Err(CliError::Core(CoreError::InvalidValue {
                row,
                column: var.name.clone(),
                message,
            }))
        } else {
            Ok(None)
        }
    };
    let value: f64 = match raw.parse() {
        Ok(v) => v,
        Err(_) => return invalid(format!("cannot parse `{raw}` as a number")),
    };
    match var.kind {
        VariableKind::Quantitative => {
            if !value.is_finite() {
                return invalid(format!("`{raw}` is not finite"));
            }
        }
        VariableKind::Indicator | VariableKind::DerivedIndicator => {
            if value != 0.0 && value != 1.0 {
                return invalid(format!("indicator value {value} is not 0 or 1"));
            }
        }
        VariableKind::Categorical => {
            if !var.levels.iter().any(|(code, _)| *code == value) {
                return invalid(format!("value {value} is not a declared level"));
            }
        }
    }
    Ok(Some(value))
}

/// Write a dataset as delimited text (missing cells empty). Derived columns
/// are written like any other so the file round-trips by value.
pub fn write_csv(ds: &Dataset, delimiter: char) -> String {
    let mut out = String::new();
    let names: Vec<&str> = ds
        .schema()
        .variables()
        .iter()
        .map(|v| v.name.as_str())
        .collect();
    out.push_str(&names.join(&delimiter.to_string()));
    out.push('\n');
    let columns: Vec<&[Option<f64>]> = names
        .iter()
        .map(|n| ds.column(n).expect("schema column"))
        .collect();
    for r in 0..ds.n_rows() {
        for (c, col) in columns.iter().enumerate() {
            if c > 0 {
                out.push(delimiter);
            }
            if let Some(v) = col[r] {
                // Integral values print without a fractional part.
                if v == v.trunc() && v.abs() < 1e15 {
                    out.push_str(&format!("{}", v as i64));
                } else {
                    out.push_str(&format!("{v}"));
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use choicefit_core::dataset::Predicate;

    fn schema() -> Schema {
        Schema::new(vec![
            VariableSpec::quantitative("a"),
            VariableSpec::quantitative("b"),
        ])
        .unwrap()
    }

    #[test]
    fn three_rows_with_one_empty_cell() {
        let ds = parse_dataset(
            "a,b\n1.5,2\n,3\n4,5\n",
            &schema(),
            &LoadOptions::default(),
            "test",
        )
        .unwrap();
        assert_eq!(ds.n_rows(), 3);
        let a = ds.column("a").unwrap();
        assert_eq!(a[1], None);
        assert_eq!(a[2], Some(4.0));
    }

    #[test]
    fn na_token_is_missing_and_configurable() {
        let ds = parse_dataset(
            "a,b\nNA,2\n",
            &schema(),
            &LoadOptions::default(),
            "test",
        )
        .unwrap();
        assert_eq!(ds.column("a").unwrap()[0], None);

        let custom = LoadOptions {
            missing_tokens: vec!["".into(), ".".into()],
            ..LoadOptions::default()
        };
        let ds = parse_dataset("a,b\n.,2\n", &schema(), &custom, "test").unwrap();
        assert_eq!(ds.column("a").unwrap()[0], None);
        // "NA" is no longer a sentinel, so strict parsing rejects it.
        assert!(parse_dataset("a,b\nNA,2\n", &schema(), &custom, "test").is_err());
    }

    #[test]
    fn strict_rejects_bad_indicator_with_location() {
        let s = Schema::new(vec![VariableSpec::indicator("flag")]).unwrap();
        let err = parse_dataset("flag\n0\n2\n", &s, &LoadOptions::default(), "test").unwrap_err();
        match err {
            CliError::Core(CoreError::InvalidValue { row, column, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(column, "flag");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn lenient_coerces_bad_cells_to_missing() {
        let s = Schema::new(vec![VariableSpec::indicator("flag")]).unwrap();
        let opts = LoadOptions {
            strict: false,
            ..LoadOptions::default()
        };
        let ds = parse_dataset("flag\n0\n2\nwat\n", &s, &opts, "test").unwrap();
        assert_eq!(ds.column("flag").unwrap(), &[Some(0.0), None, None]);
    }

    #[test]
    fn header_only_file_loads_empty() {
        let ds = parse_dataset("a,b\n", &schema(), &LoadOptions::default(), "test").unwrap();
        assert_eq!(ds.n_rows(), 0);
    }

    #[test]
    fn missing_schema_column_is_an_error() {
        let err =
            parse_dataset("a\n1\n", &schema(), &LoadOptions::default(), "test").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn derived_columns_are_computed_after_load() {
        let s = Schema::new(vec![
            VariableSpec::quantitative("age"),
            VariableSpec::derived("young", "age", Predicate::Lt(25.0)),
        ])
        .unwrap();
        let ds = parse_dataset(
            "age\n22\n40\n\n",
            &s,
            &LoadOptions::default(),
            "test",
        )
        .unwrap();
        assert_eq!(ds.column("young").unwrap(), &[Some(1.0), Some(0.0)]);
    }

    #[test]
    fn csv_round_trips_by_value() {
        let s = Schema::new(vec![
            VariableSpec::quantitative("a"),
            VariableSpec::quantitative("b"),
        ])
        .unwrap();
        let ds = parse_dataset(
            "a,b\n1.5,2\n,3\n",
            &s,
            &LoadOptions::default(),
            "test",
        )
        .unwrap();
        let text = write_csv(&ds, ',');
        let back = parse_dataset(&text, &s, &LoadOptions::default(), "round").unwrap();
        assert_eq!(back.column("a").unwrap(), ds.column("a").unwrap());
        assert_eq!(back.column("b").unwrap(), ds.column("b").unwrap());
    }
}
