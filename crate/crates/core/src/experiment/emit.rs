//! CSV and JSON output for experiment tables and fits.
//!
//! CSV reals are written with 12 significant digits; parsing the output and
//! emitting it again reproduces the same text.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::ExperimentRow;
use crate::stats::FitResult;

pub const TABLE_HEADER: &str = "epsilon,mean_cost,stderr_cost,n";
pub const FIT_HEADER: &str =
    "slope,intercept,slope_ci_halfwidth,intercept_ci_halfwidth,residual_std_error,max_abs_residual,n";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl FromStr for EmitFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn table_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            real(r.epsilon),
            real(r.mean_cost),
            real(r.stderr_cost),
            r.n
        );
    }
    out
}

pub fn fit_to_csv(fit: &FitResult) -> String {
    format!(
        "{FIT_HEADER}\n{},{},{},{},{},{},{}\n",
        real(fit.slope),
        real(fit.intercept),
        real(fit.slope_ci_halfwidth),
        real(fit.intercept_ci_halfwidth),
        real(fit.residual_std_error),
        real(fit.max_abs_residual),
        fit.n
    )
}

fn records<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, EmitError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        _ => {
            return Err(EmitError::Parse {
                line: 1,
                msg: format!("expected header `{header}`"),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() == width {
                Ok((i + 1, fields))
            } else {
                Err(EmitError::Parse {
                    line: i + 1,
                    msg: format!("expected {width} fields, got {}", fields.len()),
                })
            }
        })
        .collect()
}

fn field<T: FromStr>(line: usize, s: &str) -> Result<T, EmitError> {
    s.parse().map_err(|_| EmitError::Parse {
        line,
        msg: format!("bad value `{s}`"),
    })
}

pub fn parse_table_csv(text: &str) -> Result<Vec<ExperimentRow>, EmitError> {
    records(text, TABLE_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(ExperimentRow {
                epsilon: field(line, f[0])?,
                mean_cost: field(line, f[1])?,
                stderr_cost: field(line, f[2])?,
                n: field(line, f[3])?,
            })
        })
        .collect()
}

pub fn parse_fit_csv(text: &str) -> Result<FitResult, EmitError> {
    let rows = records(text, FIT_HEADER)?;
    let [(line, f)] = rows.as_slice() else {
        return Err(EmitError::Parse {
            line: 2,
            msg: "expected exactly one fit record".into(),
        });
    };
    let line = *line;
    Ok(FitResult {
        slope: field(line, f[0])?,
        intercept: field(line, f[1])?,
        slope_ci_halfwidth: field(line, f[2])?,
        intercept_ci_halfwidth: field(line, f[3])?,
        residual_std_error: field(line, f[4])?,
        max_abs_residual: field(line, f[5])?,
        n: field(line, f[6])?,
    })
}

fn write_out(path: &Path, text: String) -> Result<(), EmitError> {
    std::fs::write(path, text)?;
    Ok(())
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, EmitError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn emit_table(
    rows: &[ExperimentRow],
    format: EmitFormat,
    path: &Path,
) -> Result<(), EmitError> {
    let text = match format {
        EmitFormat::Csv => table_to_csv(rows),
        EmitFormat::Json => to_json(rows)?,
    };
    write_out(path, text)
}

pub fn emit_fit(fit: &FitResult, format: EmitFormat, path: &Path) -> Result<(), EmitError> {
    let text = match format {
        EmitFormat::Csv => fit_to_csv(fit),
        EmitFormat::Json => to_json(fit)?,
    };
    write_out(path, text)
}
