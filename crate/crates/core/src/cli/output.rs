//! JSON and long-format CSV renderings of command results.
//!
//! CSV rows are `section,replicate,index,key,value`. Numbers in both formats use
//! the shortest representation that parses back to the same `f64`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::commands::{EstimateResult, RunResult, Theory, VerifyReport};
use super::config::OutputFormat;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub section: &'static str,
    pub replicate: Option<usize>,
    pub index: Option<usize>,
    pub key: &'static str,
    pub value: f64,
}

fn row(
    section: &'static str,
    replicate: Option<usize>,
    index: Option<usize>,
    key: &'static str,
    value: f64,
) -> CsvRow {
    CsvRow {
        section,
        replicate,
        index,
        key,
        value,
    }
}

pub trait Report: Serialize {
    fn csv_rows(&self) -> Vec<CsvRow>;
}

fn theory_rows(t: &Theory, out: &mut Vec<CsvRow>) {
    for (key, v) in [
        ("c1", t.c1),
        ("c2", t.c2),
        ("d_left", t.d_left),
        ("d_right", t.d_right),
        ("r_c", t.r_c),
        ("t_c", t.t_c),
    ] {
        out.push(row("theory", None, None, key, v));
    }
    for s in &t.spikes {
        out.push(row("spike", None, Some(s.index), "r", s.r));
        out.push(row("spike", None, Some(s.index), "limit", s.limit));
        let flag = match s.regime {
            super::commands::Regime::Outlier => 1.0,
            super::commands::Regime::Sticks => 0.0,
            super::commands::Regime::Deterministic => 2.0,
        };
        out.push(row("spike", None, Some(s.index), "regime", flag));
    }
}

impl Report for Theory {
    fn csv_rows(&self) -> Vec<CsvRow> {
        let mut out = Vec::new();
        theory_rows(self, &mut out);
        out
    }
}

impl Report for RunResult {
    fn csv_rows(&self) -> Vec<CsvRow> {
        let mut out = Vec::new();
        theory_rows(&self.theory, &mut out);
        for rep in &self.replicates {
            for (i, &l) in rep.lambdas.iter().enumerate() {
                out.push(row("lambda", Some(rep.index), Some(i), "lambda", l));
            }
            for e in &rep.estimates {
                out.push(row(
                    "estimate",
                    Some(rep.index),
                    Some(e.index),
                    "r_hat",
                    e.r_hat,
                ));
            }
        }
        for (i, (&m, &s)) in self
            .aggregate
            .mean
            .iter()
            .zip(&self.aggregate.sd)
            .enumerate()
        {
            out.push(row("aggregate", None, Some(i), "mean", m));
            out.push(row("aggregate", None, Some(i), "sd", s));
        }
        for (i, r) in self.aggregate.mean_r_hat.iter().enumerate() {
            if let Some(r) = r {
                out.push(row("aggregate", None, Some(i), "mean_r_hat", *r));
            }
        }
        for (i, &v) in self.plot.rug.iter().enumerate() {
            out.push(row("plot", None, Some(i), "rug", v));
        }
        for (i, (&x, &y)) in self
            .plot
            .density_x
            .iter()
            .zip(&self.plot.density_y)
            .enumerate()
        {
            out.push(row("plot", None, Some(i), "density_x", x));
            out.push(row("plot", None, Some(i), "density_y", y));
        }
        for (i, &v) in self.plot.lines.iter().enumerate() {
            out.push(row("plot", None, Some(i), "line", v));
        }
        out
    }
}

impl Report for EstimateResult {
    fn csv_rows(&self) -> Vec<CsvRow> {
        let mut out = vec![
            row("theory", None, None, "c1", self.c1),
            row("theory", None, None, "c2", self.c2),
            row("theory", None, None, "d_right", self.d_right),
            row("theory", None, None, "detect_margin", self.detect_margin),
        ];
        for e in &self.estimates {
            out.push(row("estimate", None, Some(e.index), "lambda", e.lambda));
            out.push(row("estimate", None, Some(e.index), "r_hat", e.r_hat));
        }
        let offset = self.estimates.len();
        for (i, &l) in self.bulk.iter().enumerate() {
            out.push(row("bulk", None, Some(offset + i), "lambda", l));
        }
        out
    }
}

impl Report for VerifyReport {
    fn csv_rows(&self) -> Vec<CsvRow> {
        let mut out = Vec::new();
        theory_rows(&self.theory, &mut out);
        for rep in &self.replicates {
            for (i, e) in rep.outliers.iter().enumerate() {
                out.push(row("outlier", Some(rep.index), Some(i), "lambda", e.lambda));
                out.push(row(
                    "outlier",
                    Some(rep.index),
                    Some(i),
                    "normalized_det",
                    e.normalized,
                ));
            }
            for (i, c) in rep.comparisons.iter().enumerate() {
                out.push(row("compare", Some(rep.index), Some(i), "lambda", c.lambda));
                out.push(row(
                    "compare",
                    Some(rep.index),
                    Some(i),
                    "reduced",
                    c.reduced,
                ));
                out.push(row("compare", Some(rep.index), Some(i), "full", c.full));
            }
            // row-major entries of M_n and of its limit
            for (i, (m, l)) in rep
                .mn
                .measured
                .iter()
                .flatten()
                .zip(rep.mn.limit.iter().flatten())
                .enumerate()
            {
                out.push(row("mn", Some(rep.index), Some(i), "measured", *m));
                out.push(row("mn", Some(rep.index), Some(i), "limit", *l));
            }
        }
        out.push(row(
            "summary",
            None,
            None,
            "certified",
            self.certified as f64,
        ));
        out.push(row(
            "summary",
            None,
            None,
            "max_outlier_residual",
            self.max_outlier_residual,
        ));
        out.push(row(
            "summary",
            None,
            None,
            "max_relative_diff",
            self.max_relative_diff,
        ));
        out
    }
}

pub fn to_json<R: Report>(report: &R) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn to_csv<R: Report>(report: &R) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "replicate", "index", "key", "value"])?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in report.csv_rows() {
        w.write_record([
            r.section.to_string(),
            opt(r.replicate),
            opt(r.index),
            r.key.to_string(),
            format!("{:?}", r.value),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render<R: Report>(report: &R, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => to_json(report),
        OutputFormat::Csv => to_csv(report),
    }
}

fn with_extension(path: &Path, format: OutputFormat) -> PathBuf {
    path.with_extension(match format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    })
}

/// Writes each format to `out` (one format) or to `out` with the format's
/// extension (several formats); without `out`, writes to stdout.
pub fn emit<R: Report>(report: &R, formats: &[OutputFormat], out: Option<&Path>) -> Result<()> {
    for &format in formats {
        let text = render(report, format)?;
        match out {
            Some(path) if formats.len() == 1 => std::fs::write(path, text)?,
            Some(path) => std::fs::write(with_extension(path, format), text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
    }
    Ok(())
}
