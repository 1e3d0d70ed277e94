// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{run_mc, CurveAxis, McCell, McSpec, McTable, TestId};
use crate::changepoint::TrimKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Text,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "text" => Ok(Self::Text),
            other => Err(Error::domain(format!("unknown format '{other}'; expected csv or text"))),
        }
    }
}

const HEADER: [&str; 12] = [
    "n",
    "test",
    "trim",
    "alpha",
    "m",
    "level",
    "reps",
    "rejections",
    "failures",
    "frequency",
    "mc_stderr",
    "flagged",
];

fn row(c: &McCell, human: bool) -> [String; 12] {
    let num = |v: f64| if human { format!("{v:.4}") } else { v.to_string() };
    [
        c.n.to_string(),
        c.test.label(),
        c.test.kind.as_str().to_string(),
        c.test.alpha.to_string(),
        c.test.m.map(|m| m.to_string()).unwrap_or_default(),
        c.level.to_string(),
        c.reps.to_string(),
        c.rejections.to_string(),
        c.failures.to_string(),
        num(c.frequency),
        num(c.mc_stderr),
        c.flagged.to_string(),
    ]
}

/// Renders a table as CSV or as aligned text.
pub fn emit_table(table: &McTable, format: TableFormat) -> String {
    let human = format == TableFormat::Text;
    let rows: Vec<[String; 12]> = table.cells.iter().map(|c| row(c, human)).collect();
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(HEADER).expect("write to memory");
            for r in &rows {
                w.write_record(r).expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
        }
        TableFormat::Text => {
            let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
            for r in &rows {
                for (w, v) in widths.iter_mut().zip(r) {
                    *w = (*w).max(v.len());
                }
            }
            let mut out = String::new();
            let mut line = |cells: &mut dyn Iterator<Item = &str>| {
                let parts: Vec<String> = cells.zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
                let _ = writeln!(out, "{}", parts.join("  ").trim_end());
            };
            line(&mut HEADER.iter().copied());
            for r in &rows {
                line(&mut r.iter().map(String::as_str));
            }
            out
        }
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Table(format!("line {line}: cannot parse column '{}' from '{raw}'", HEADER[i])))
}

/// Parses the CSV produced by [`emit_table`].
pub fn parse_table(text: &str) -> Result<McTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Table(e.to_string()))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Table(format!(
            "unexpected header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let kind: TrimKind = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Table(format!("line {line}: bad trim kind")))?;
        let m = match rec.get(4).unwrap_or("") {
            "" => None,
            _ => Some(field(&rec, 4, line)?),
        };
        cells.push(McCell {
            n: field(&rec, 0, line)?,
            test: TestId {
                kind,
                alpha: field(&rec, 3, line)?,
                m,
            },
            level: field(&rec, 5, line)?,
            reps: field(&rec, 6, line)?,
            rejections: field(&rec, 7, line)?,
            failures: field(&rec, 8, line)?,
            frequency: field(&rec, 9, line)?,
            mc_stderr: field(&rec, 10, line)?,
            flagged: field(&rec, 11, line)?,
        });
    }
    Ok(McTable { cells })
}

/// Long-format CSV `x,n,test,value,mc_stderr` over a contamination or
/// post-change-scale grid. Every grid point reuses the base seed, so the
/// curves are computed on common random numbers.
pub fn emit_curves(base: &McSpec, axis: &CurveAxis) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "n", "test", "value", "mc_stderr"])
        .map_err(|e| Error::Table(e.to_string()))?;
    for &x in axis.grid() {
        let spec = axis.apply(base, x)?;
        let table = run_mc(&spec)?;
        for c in &table.cells {
            w.write_record([
                x.to_string(),
                c.n.to_string(),
                c.test.label(),
                c.frequency.to_string(),
                c.mc_stderr.to_string(),
            ])
            .map_err(|e| Error::Table(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Table(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Table(e.to_string()))
}
