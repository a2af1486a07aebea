//! Text-table rendering in the published style: coefficients as
//! `.00859 (2.83)` with at most three significant digits and no leading
//! zero, probed (test-added) coefficients in square brackets without
//! elasticities, p-values like `3.8e-4` below 0.01.
//!
//! JSON output always carries full precision; these renderings are for
//! reading.

use choicefit_core::inference::LRTestResult;

/// Round to `digits` significant digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - exp);
    (x * scale).round() / scale
}

/// Coefficient / t-ratio / elasticity style: three significant digits,
/// trailing zeros trimmed, leading zero dropped.
pub fn fmt_coef(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded = round_sig(x, 3);
    let exp = rounded.abs().log10().floor() as i32;
    let decimals = (2 - exp).max(0) as usize;
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if let Some(rest) = s.strip_prefix("0.") {
        s = format!(".{rest}");
    } else if let Some(rest) = s.strip_prefix("-0.") {
        s = format!("-.{rest}");
    }
    s
}

/// P-value style: two significant decimals at 0.01 and above, compact
/// scientific (`3.8e-4`) below.
pub fn fmt_pvalue(p: f64) -> String {
    if p <= 0.0 {
        return "0".to_string();
    }
    if p >= 0.01 {
        let exp = p.log10().floor() as i32;
        let decimals = (1 - exp).max(1) as usize;
        return format!("{:.decimals$}", round_sig(p, 2));
    }
    let exp = p.log10().floor() as i32;
    let mut mantissa = p / 10f64.powi(exp);
    let mut exp = exp;
    mantissa = (mantissa * 10.0).round() / 10.0;
    if mantissa >= 10.0 {
        mantissa /= 10.0;
        exp += 1;
    }
    format!("{mantissa:.1}e{exp}")
}

/// One focal coefficient cell: either a significant coefficient of the final
/// model (with averaged elasticities when the variable is continuous) or a
/// bracketed test-added probe (never with elasticities).
#[derive(Debug, Clone, PartialEq)]
pub struct FocalCell {
    pub coefficient: f64,
    pub t_ratio: f64,
    pub probe: bool,
    /// (averaged direct, averaged cross), absent for probes and indicators.
    pub elasticity: Option<(f64, f64)>,
}

impl FocalCell {
    pub fn coefficient_text(&self) -> String {
        let body = format!("{} ({})", fmt_coef(self.coefficient), fmt_coef(self.t_ratio));
        if self.probe {
            format!("[{body}]")
        } else {
            body
        }
    }
}

/// One row of a causation/severity results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTableRow {
    pub road_class: String,
    pub area: String,
    pub accident_type: String,
    /// (LL, restricted LL, rho2) of the final model.
    pub fit_summary: Option<(f64, f64, f64)>,
    /// One cell per non-base outcome; `None` when the partition failed.
    pub cells: Vec<Option<FocalCell>>,
    /// Set when estimation was skipped; the reason is printed in place of
    /// the cells.
    pub status: Option<String>,
}

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

/// Fixed-width text table of focal-coefficient results, one coefficient
/// column and two elasticity columns per non-base outcome.
pub fn render_causation_table(rows: &[ModelTableRow], outcome_labels: &[String]) -> String {
    let n_blocks = outcome_labels.len();
    let mut header: Vec<String> = vec![
        "#".into(),
        "road class".into(),
        "area".into(),
        "accident type".into(),
        "LL".into(),
        "LL(0)".into(),
        "rho2".into(),
    ];
    for label in outcome_labels {
        header.push(format!("{label}: coef (t)"));
        header.push(format!("E1[{label}]"));
        header.push(format!("E2[{label}]"));
    }
    let fixed = header.len() - 3 * n_blocks;

    let mut grid: Vec<Vec<String>> = vec![header];
    for (i, row) in rows.iter().enumerate() {
        let mut cells = vec![
            format!("{}", i + 1),
            row.road_class.clone(),
            row.area.clone(),
            row.accident_type.clone(),
        ];
        match row.fit_summary {
            Some((ll, ll_restricted, rho2)) => {
                cells.push(format!("{ll:.2}"));
                cells.push(format!("{ll_restricted:.2}"));
                cells.push(fmt_coef(rho2));
            }
            None => cells.extend([String::new(), String::new(), String::new()]),
        }
        if let Some(status) = &row.status {
            cells.push(format!("({status})"));
            while cells.len() < fixed + 3 * n_blocks {
                cells.push(String::new());
            }
        } else {
            for b in 0..n_blocks {
                match row.cells.get(b).and_then(|c| c.as_ref()) {
                    Some(cell) => {
                        cells.push(cell.coefficient_text());
                        match (cell.probe, cell.elasticity) {
                            (false, Some((direct, cross))) => {
                                cells.push(fmt_coef(direct));
                                cells.push(fmt_coef(cross));
                            }
                            _ => {
                                cells.push(String::new());
                                cells.push(String::new());
                            }
                        }
                    }
                    None => {
                        cells.push(String::new());
                        cells.push(String::new());
                        cells.push(String::new());
                    }
                }
            }
        }
        grid.push(cells);
    }
    render_grid(&grid)
}

/// One row of a likelihood-ratio test table.
#[derive(Debug, Clone)]
pub struct LrTableRow {
    pub label: String,
    pub lr: LRTestResult,
    /// Conclusion cell, empty when the test does not reject.
    pub conclusion: String,
}

/// Fixed-width text table of likelihood-ratio tests in the published column
/// order: M, K, pooled LL, summed bin LLs, statistic, df, p-value,
/// conclusion.
pub fn render_lr_table(rows: &[LrTableRow]) -> String {
    let mut grid: Vec<Vec<String>> = vec![vec![
        "#".into(),
        "model".into(),
        "M".into(),
        "K".into(),
        "LL".into(),
        "sum LL_m".into(),
        "stat".into(),
        "df".into(),
        "p-value".into(),
        "conclusion".into(),
    ]];
    for (i, row) in rows.iter().enumerate() {
        grid.push(vec![
            format!("{}", i + 1),
            row.label.clone(),
            format!("{}", row.lr.m),
            format!("{}", row.lr.k),
            format!("{:.2}", row.lr.ll_pooled),
            format!("{:.2}", row.lr.ll_bins_sum),
            format!("{:.2}", row.lr.statistic),
            format!("{}", row.lr.df),
            fmt_pvalue(row.lr.p_value),
            row.conclusion.clone(),
        ]);
    }
    render_grid(&grid)
}

fn render_grid(grid: &[Vec<String>]) -> String {
    let columns = grid.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in grid {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for (r, row) in grid.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| pad(cell, widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if r == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (columns.saturating_sub(1));
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

/// Coefficient table of one fitted model.
pub fn render_fit(fit: &choicefit_core::mle::FitResult, level: f64) -> String {
    let flags = choicefit_core::mle::significance(fit, level);
    let mut grid: Vec<Vec<String>> = vec![vec![
        "outcome".into(),
        "term".into(),
        "estimate".into(),
        "t-ratio".into(),
        "sig".into(),
    ]];
    for (i, name) in fit.names.iter().enumerate() {
        grid.push(vec![
            name.outcome.clone(),
            name.term.clone(),
            fmt_coef(fit.beta[i]),
            fmt_coef(fit.t_ratios[i]),
            if flags[i] { "*".into() } else { String::new() },
        ]);
    }
    let mut out = render_grid(&grid);
    out.push_str(&format!(
        "n = {}, K = {}, LL = {:.4}, restricted LL = {:.4}, rho2 = {:.4}, AIC = {:.4}{}{}\n",
        fit.n_used,
        fit.k,
        fit.ll,
        fit.ll_restricted,
        fit.rho2,
        fit.aic,
        if fit.converged { "" } else { ", NOT CONVERGED" },
        if fit.separation { ", SEPARATION SUSPECTED" } else { "" },
    ));
    out
}

/// Percentage-distribution block.
pub fn render_distribution(d: &choicefit_core::dataset::Distribution, title: &str) -> String {
    let mut grid: Vec<Vec<String>> = vec![vec![
        "category".into(),
        "count".into(),
        "percent".into(),
    ]];
    for share in &d.shares {
        grid.push(vec![
            share.label.clone(),
            format!("{}", share.count),
            format!("{:.2}", share.percent),
        ]);
    }
    format!("{title} (n = {})\n{}", d.n, render_grid(&grid))
}
