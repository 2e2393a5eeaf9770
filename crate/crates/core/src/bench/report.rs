use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::evaluate::{EvalRow, ExampleDetail};
use super::stats::DatasetStats;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::invalid(format!(
                "unknown report format `{other}` (json, csv or markdown)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: &'a [EvalRow],
    details: &'a [ExampleDetail],
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Renders evaluation rows. JSON includes per-example details; CSV and
/// markdown tabulate the rows only.
pub fn render_report(rows: &[EvalRow], details: &[ExampleDetail], format: ReportFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("report needs at least one row"));
    }
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(&JsonReport { rows, details }).expect("serializable");
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str(
                "system,size,edit_ratio,nli,reversed_nli,sari,bleu,update_rouge,length_ratio,success_rate,flagged\n",
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&r.system),
                    r.size,
                    r.edit_ratio,
                    r.nli,
                    r.reversed_nli,
                    r.sari,
                    r.bleu,
                    r.update_rouge,
                    r.length_ratio,
                    opt(r.success_rate),
                    r.flagged
                );
            }
        }
        ReportFormat::Markdown => {
            out.push_str(
                "| System | Edit Ratio | NLI | Reversed NLI | SARI | BLEU | Update-R | Length Ratio | Success Rate |\n",
            );
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {} |",
                    r.system.replace('|', "\\|"),
                    r.edit_ratio,
                    r.nli,
                    r.reversed_nli,
                    100.0 * r.sari,
                    100.0 * r.bleu,
                    100.0 * r.update_rouge,
                    r.length_ratio,
                    opt2(r.success_rate)
                );
            }
        }
    }
    Ok(out)
}

pub fn emit_report(rows: &[EvalRow], details: &[ExampleDetail], format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(rows, details, format)?)?;
    Ok(())
}

/// Renders dataset statistics with the columns Size, Ins, Sou, Tar, Len Ra,
/// Edit Ra and the two NLI directions.
pub fn render_stats(stats: &DatasetStats, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(stats).expect("serializable");
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str("task,size,ins,sou,tar,len_ratio,edit_ratio,nli_st,nli_ts\n");
            for r in &stats.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.task,
                    r.size,
                    r.ins,
                    r.sou,
                    r.tar,
                    r.len_ratio,
                    r.edit_ratio,
                    opt(r.nli_st),
                    opt(r.nli_ts)
                );
            }
        }
        ReportFormat::Markdown => {
            out.push_str("| Task | Size | Ins | Sou | Tar | Len Ra | Edit Ra | NLI s-t | NLI t-s |\n");
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for r in &stats.rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {} | {} |",
                    r.task,
                    r.size,
                    r.ins,
                    r.sou,
                    r.tar,
                    r.len_ratio,
                    r.edit_ratio,
                    opt2(r.nli_st),
                    opt2(r.nli_ts)
                );
            }
        }
    }
    out
}

/// One JSON object per example, in evaluation order.
pub fn render_details(details: &[ExampleDetail]) -> String {
    crate::datagen::to_jsonl(details)
}
