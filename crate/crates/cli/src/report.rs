//! Serialisation of command output and verification reports.

use crate::checks::Check;
use crate::config::{Format, RunConfig};
use serde::Serialize;
use std::io::Write;

/// One observation in long format: an item, a named quantity and its value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub item: String,
    pub quantity: String,
    pub value: f64,
}

impl Row {
    pub fn new(item: impl Into<String>, quantity: impl Into<String>, value: f64) -> Self {
        Row { item: item.into(), quantity: quantity.into(), value }
    }
}

#[derive(Serialize)]
struct TableDoc<'a> {
    command: &'a str,
    config: &'a RunConfig,
    rows: &'a [Row],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(checks: &[Check]) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Summary { total: checks.len(), passed, failed: checks.len() - passed }
    }
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    suite: &'a str,
    config: &'a RunConfig,
    checks: &'a [Check],
    summary: Summary,
}

pub fn write_rows(out: &mut dyn Write, format: Format, command: &str, cfg: &RunConfig, rows: &[Row]) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &TableDoc { command, config: cfg, rows })?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_report(out: &mut dyn Write, format: Format, suite: &str, cfg: &RunConfig, checks: &[Check]) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &ReportDoc { suite, config: cfg, checks, summary: Summary::of(checks) })?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["id", "suite", "equation", "residual", "tolerance", "pass", "detail"])?;
            for c in checks {
                w.write_record([c.id.as_str(), c.suite, c.equation, &fmt_num(c.residual), &fmt_num(c.tolerance), if c.pass { "true" } else { "false" }, &c.detail])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}
