//! Report rows and their two renderings: a fixed-width table for people
//! and a CSV body for machines.
//!
//! Display rounding is two decimals for probabilities and risk
//! differences and one decimal for efficacy percent; the CSV keeps full
//! precision. Output is a pure function of the rows, so identical runs
//! render byte-identical bodies.

use std::fmt::Write as _;

/// One line of a run report. Numeric fields are absent when the analysis
/// does not produce them (graph readings, positivity audits).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub analysis: String,
    /// Expected outcome under treatment, when the analysis is a contrast.
    pub risk_treated: Option<f64>,
    /// Expected outcome under control.
    pub risk_control: Option<f64>,
    /// Exact value computed by enumeration.
    pub analytic: Option<f64>,
    /// Efficacy transform `1 - risk_treated / risk_control`.
    pub ve: Option<f64>,
    /// Finite-sample estimate.
    pub estimate: Option<f64>,
    /// Bootstrap standard error of the estimate.
    pub se: Option<f64>,
    pub flags: Vec<String>,
}

impl ReportRow {
    pub fn new(analysis: impl Into<String>) -> Self {
        ReportRow {
            analysis: analysis.into(),
            risk_treated: None,
            risk_control: None,
            analytic: None,
            ve: None,
            estimate: None,
            se: None,
            flags: Vec::new(),
        }
    }
}

/// Two-decimal probability or risk difference, never "-0.00".
pub fn fmt_prob(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Efficacy as a one-decimal percentage, never "-0.0%".
pub fn fmt_ve(x: f64) -> String {
    let s = format!("{:.1}%", 100.0 * x);
    if s == "-0.0%" {
        "0.0%".to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>, f: impl Fn(f64) -> String) -> String {
    x.map_or_else(|| "-".to_string(), f)
}

const HEADERS: [&str; 8] = [
    "analysis", "risk(1)", "risk(0)", "analytic", "ve", "estimate", "se", "flags",
];

fn cells(row: &ReportRow) -> [String; 8] {
    [
        row.analysis.clone(),
        opt(row.risk_treated, fmt_prob),
        opt(row.risk_control, fmt_prob),
        opt(row.analytic, fmt_prob),
        opt(row.ve, fmt_ve),
        opt(row.estimate, fmt_prob),
        opt(row.se, |x| format!("{x:.4}")),
        if row.flags.is_empty() {
            "-".to_string()
        } else {
            row.flags.join("; ")
        },
    ]
}

/// Human-readable fixed-width table.
pub fn render_table(rows: &[ReportRow]) -> String {
    let body: Vec<[String; 8]> = rows.iter().map(cells).collect();
    let mut widths: Vec<usize> = HEADERS.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let write_line = |out: &mut String, cells: &[String]| {
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i == 0 || i == cells.len() - 1 {
                // text columns flush left; the last pads to nothing
                if i == cells.len() - 1 {
                    out.push_str(cell);
                } else {
                    let _ = write!(out, "{cell:<w$}");
                }
            } else {
                let _ = write!(out, "{cell:>w$}");
            }
        }
        out.push('\n');
    };
    let headers: Vec<String> = HEADERS.iter().map(|h| h.to_string()).collect();
    write_line(&mut out, &headers);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    write_line(&mut out, &rule);
    for row in &body {
        write_line(&mut out, row);
    }
    out
}

/// CSV body with columns `analysis,analytic,estimate,se,flags`, numbers
/// at full precision, flags joined by `;`.
pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let full = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v}"));
    writer
        .write_record(["analysis", "analytic", "estimate", "se", "flags"])
        .expect("writing to a Vec cannot fail");
    for row in rows {
        writer
            .write_record([
                row.analysis.clone(),
                full(row.analytic),
                full(row.estimate),
                full(row.se),
                row.flags.join(";"),
            ])
            .expect("writing to a Vec cannot fail");
    }
    let bytes = writer.into_inner().expect("no underlying io");
    String::from_utf8(bytes).expect("csv output is utf-8")
}
