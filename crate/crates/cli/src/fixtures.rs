//! Replay of published likelihood-ratio test tables.
//!
//! A fixtures file carries, per table row, the pooled log-likelihood, the
//! summed per-subset log-likelihoods, the subset count M and the
//! per-model coefficient count K, together with the printed degrees of
//! freedom, p-value and conclusion. Replay recomputes statistic, df and
//! p-value from the four numeric inputs alone and compares against the
//! printed values: the p must match to one unit in its last printed digit
//! and the conclusion verbatim. Rows that cannot match are reported as
//! exceptions with the reason (printed tables carry rounded inputs and the
//! occasional misprint).

use crate::error::{CliError, Result};
use crate::report::fmt_pvalue;
use choicefit_core::inference::{lr_test_from_sums, LRTestResult};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixturesDoc {
    pub tables: Vec<TableDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDoc {
    pub name: String,
    /// "pooling" (car/SUV separation) or "bins" (bin-structure tests).
    pub kind: String,
    #[serde(default)]
    pub description: Option<String>,
    pub rows: Vec<RowDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowDoc {
    pub row: String,
    pub label: String,
    pub m: usize,
    pub k: usize,
    /// Pooled log-likelihood exactly as printed (string, so the printing
    /// precision is known for rounding diagnosis).
    pub ll_pooled: String,
    /// Summed per-subset log-likelihoods as printed.
    pub ll_bins_sum: String,
    pub printed_df: usize,
    pub printed_p: String,
    pub printed_conclusion: String,
    #[serde(default)]
    pub note: Option<String>,
}

impl FixturesDoc {
    pub fn load(path: &Path) -> Result<FixturesDoc> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(path.display().to_string(), e))
    }
}

/// Printed number as (value, unit of its last printed digit).
pub fn parse_printed(s: &str) -> Option<(f64, f64)> {
    let value: f64 = s.trim().parse().ok()?;
    let (mantissa, exp) = match s.trim().split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s.trim(), 0),
    };
    let decimals = mantissa
        .split_once('.')
        .map(|(_, frac)| frac.len())
        .unwrap_or(0);
    Some((value, 10f64.powi(exp - decimals as i32)))
}

#[derive(Debug, Clone)]
pub struct ReplayRow {
    pub table: String,
    pub row: String,
    pub label: String,
    pub lr: Option<LRTestResult>,
    pub conclusion: String,
    pub printed_df: usize,
    pub printed_p: String,
    pub printed_conclusion: String,
    pub p_matches: bool,
    pub df_matches: bool,
    pub conclusion_matches: bool,
    /// For non-matching rows: whether printed p and conclusion become
    /// reachable once the statistic is allowed to move within the printing
    /// precision of the two log-likelihood inputs. True means the mismatch
    /// is attributable to the published rounding rather than a misprint.
    pub rounding_attributable: bool,
    /// Reason this row cannot be reproduced from its printed inputs.
    pub exception: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub rows: Vec<ReplayRow>,
    pub n_rows: usize,
    pub n_exceptions: usize,
}

/// Conclusion string for a table kind.
fn conclusion_for(kind: &str, reject: bool) -> String {
    match (kind, reject) {
        ("pooling", false) => "Car = SUV".to_string(),
        ("pooling", true) => "Car != SUV".to_string(),
        ("bins", true) => "SL effect".to_string(),
        ("bins", false) => String::new(),
        (other, _) => format!("unknown table kind `{other}`"),
    }
}

/// Recompute every row of the fixtures document at the given level.
pub fn replay(doc: &FixturesDoc, level: f64) -> ReplayReport {
    let mut rows = Vec::new();
    let mut n_exceptions = 0usize;
    for table in &doc.tables {
        for row in &table.rows {
            rows.push(replay_row(table, row, level));
            if rows.last().unwrap().exception.is_some() {
                n_exceptions += 1;
            }
        }
    }
    ReplayReport {
        n_rows: rows.len(),
        n_exceptions,
        rows,
    }
}

fn replay_row(table: &TableDoc, row: &RowDoc, level: f64) -> ReplayRow {
    let parsed_pooled = parse_printed(&row.ll_pooled);
    let parsed_sum = parse_printed(&row.ll_bins_sum);
    let mut exception: Option<String> = None;

    let lr = match (parsed_pooled, parsed_sum) {
        (Some((ll_pooled, _)), Some((ll_sum, _))) => {
            match lr_test_from_sums(ll_pooled, ll_sum, row.m, row.k, level) {
                Ok(lr) => Some(lr),
                Err(e) => {
                    exception = Some(format!("inputs as printed cannot be tested: {e}"));
                    None
                }
            }
        }
        _ => {
            exception = Some("unparseable log-likelihood inputs".to_string());
            None
        }
    };

    let mut conclusion = String::new();
    let mut p_matches = false;
    let mut df_matches = false;
    let mut conclusion_matches = false;
    let mut rounding_attributable = false;

    if let Some(lr) = &lr {
        conclusion = conclusion_for(&table.kind, lr.reject);
        p_matches = match parse_printed(&row.printed_p) {
            Some((printed, unit)) => (lr.p_value - printed).abs() <= unit * (1.0 + 1e-9),
            None => false,
        };
        df_matches = lr.df == row.printed_df;
        conclusion_matches = conclusion == row.printed_conclusion.trim();

        if !(p_matches && conclusion_matches) {
            // Half a unit of each printed log-likelihood moves the statistic
            // by up to the sum of the two units; check whether the printed p
            // and conclusion are reachable inside that slack.
            let jitter =
                parsed_pooled.map_or(0.0, |(_, u)| u) + parsed_sum.map_or(0.0, |(_, u)| u);
            let df = lr.df as u32;
            let p_hi = choicefit_core::inference::chi_squared_sf(lr.statistic - jitter, df);
            let p_lo = choicefit_core::inference::chi_squared_sf(lr.statistic + jitter, df);
            let p_reachable = match parse_printed(&row.printed_p) {
                Some((printed, unit)) => {
                    printed + unit >= p_lo - 1e-15 && printed - unit <= p_hi + 1e-15
                }
                None => false,
            };
            let printed_rejects = row.printed_conclusion.trim() == conclusion_for(&table.kind, true);
            let conclusion_reachable = if printed_rejects {
                p_lo < level
            } else {
                p_hi >= level
            };
            rounding_attributable = (p_matches || p_reachable)
                && (conclusion_matches || conclusion_reachable);

            let mut parts = Vec::new();
            if !p_matches {
                parts.push(format!(
                    "computed p {} differs from printed {}",
                    fmt_pvalue(lr.p_value),
                    row.printed_p
                ));
            }
            if !conclusion_matches {
                parts.push(format!(
                    "computed conclusion `{conclusion}` differs from printed `{}`",
                    row.printed_conclusion
                ));
            }
            parts.push(if rounding_attributable {
                "attributable to the printing precision of the log-likelihood inputs".to_string()
            } else {
                "not explained by input rounding (likely a misprint)".to_string()
            });
            exception = Some(parts.join("; "));
        }
    }

    ReplayRow {
        table: table.name.clone(),
        row: row.row.clone(),
        label: row.label.clone(),
        lr,
        conclusion,
        printed_df: row.printed_df,
        printed_p: row.printed_p.clone(),
        printed_conclusion: row.printed_conclusion.clone(),
        p_matches,
        df_matches,
        conclusion_matches,
        rounding_attributable,
        exception,
        note: row.note.clone(),
    }
}

pub fn replay_json(report: &ReplayReport) -> Value {
    json!({
        "n_rows": report.n_rows,
        "n_exceptions": report.n_exceptions,
        "rows": report.rows.iter().map(|r| json!({
            "table": r.table,
            "row": r.row,
            "label": r.label,
            "statistic": r.lr.as_ref().map(|l| l.statistic),
            "df": r.lr.as_ref().map(|l| l.df),
            "p_value": r.lr.as_ref().map(|l| l.p_value),
            "p_rendered": r.lr.as_ref().map(|l| fmt_pvalue(l.p_value)),
            "conclusion": r.conclusion,
            "printed_df": r.printed_df,
            "printed_p": r.printed_p,
            "printed_conclusion": r.printed_conclusion,
            "p_matches": r.p_matches,
            "df_matches": r.df_matches,
            "conclusion_matches": r.conclusion_matches,
            "rounding_attributable": r.rounding_attributable,
            "exception": r.exception,
            "note": r.note,
        })).collect::<Vec<_>>(),
        "exceptions": report.rows.iter().filter_map(|r| {
            r.exception.as_ref().map(|e| json!({
                "table": r.table,
                "row": r.row,
                "label": r.label,
                "reason": e,
                "rounding_attributable": r.rounding_attributable,
                "note": r.note,
            }))
        }).collect::<Vec<_>>(),
    })
}

/// Text rendering: one line per row plus an exceptions block.
pub fn replay_text(report: &ReplayReport) -> String {
    let mut out = String::new();
    let mut current_table = String::new();
    for r in &report.rows {
        if r.table != current_table {
            current_table = r.table.clone();
            out.push_str(&format!("table {current_table}\n"));
        }
        match &r.lr {
            Some(lr) => out.push_str(&format!(
                "  row {:>3}  {:<44}  M={:<2} K={:<2} stat={:>8.2} df={:>3} p={:<8} {}{}\n",
                r.row,
                r.label,
                lr.m,
                lr.k,
                lr.statistic,
                lr.df,
                fmt_pvalue(lr.p_value),
                r.conclusion,
                if r.exception.is_some() { "  [exception]" } else { "" },
            )),
            None => out.push_str(&format!(
                "  row {:>3}  {:<44}  untestable as printed  [exception]\n",
                r.row, r.label,
            )),
        }
    }
    out.push_str(&format!(
        "\n{} rows, {} exceptions\n",
        report.n_rows, report.n_exceptions
    ));
    for r in &report.rows {
        if let Some(e) = &r.exception {
            out.push_str(&format!("exception {} row {}: {e}", r.table, r.row));
            if let Some(note) = &r.note {
                out.push_str(&format!(" (note: {note})"));
            }
            out.push('\n');
        }
    }
    out
}
