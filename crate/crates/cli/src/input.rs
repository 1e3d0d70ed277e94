// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reading and writing equally spaced series as CSV.

use std::io::{Read, Write};

use driftwatch_core::SamplePath;

use crate::CliError;

/// Relative tolerance on the spacing of a `t` column.
pub const SPACING_TOL: f64 = 1e-9;

/// Reads a series with header `t,x` or a single `x` column. A `t` column
/// fixes the step; otherwise `h` must be supplied.
pub fn read_series<R: Read>(reader: R, h: Option<f64>) -> Result<SamplePath, CliError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let has_t = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["t", "x"] => true,
        ["x"] => false,
        _ => {
            return Err(CliError::Data(format!(
                "line 1: expected header 't,x' or 'x', found '{}'",
                header.join(",")
            )))
        }
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| -> Result<f64, CliError> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Data(format!("line {line}: '{raw}' is not a finite number")))
        };
        if has_t {
            times.push(cell(0)?);
            values.push(cell(1)?);
        } else {
            values.push(cell(0)?);
        }
    }

    let step = if has_t {
        let step = spacing(&times)?;
        if let Some(h) = h {
            if (h - step).abs() > SPACING_TOL * step.abs() {
                return Err(CliError::Data(format!(
                    "--h {h} disagrees with the t column spacing {step}"
                )));
            }
        }
        step
    } else {
        h.ok_or_else(|| CliError::Usage("input has no t column; pass --h".into()))?
    };
    if !(step > 0.0) {
        return Err(CliError::Usage(format!("step must be positive, got {step}")));
    }
    SamplePath::new(step, values).map_err(CliError::Core)
}

fn spacing(times: &[f64]) -> Result<f64, CliError> {
    if times.len() < 2 {
        return Err(CliError::Data("need at least two observations".into()));
    }
    let h = times[1] - times[0];
    if !(h > 0.0) {
        return Err(CliError::Data("t must be increasing".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > SPACING_TOL * h {
            // Header is line 1 and the first record line 2.
            return Err(CliError::Data(format!("line {}: t is not equally spaced", i + 3)));
        }
    }
    Ok(h)
}

pub fn write_series<W: Write>(writer: W, path: &SamplePath) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "x"]).map_err(CliError::output)?;
    for (t, x) in path.times().zip(&path.values) {
        w.write_record([t.to_string(), x.to_string()])
            .map_err(CliError::output)?;
    }
    w.flush().map_err(CliError::output)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_column_sets_step() {
        let p = read_series("t,x\n0,1\n0.5,2\n1.0,3\n1.5,2.5\n".as_bytes(), None).unwrap();
        assert_eq!(p.step, 0.5);
        assert_eq!(p.values, vec![1.0, 2.0, 3.0, 2.5]);
    }

    #[test]
    fn single_column_needs_h() {
        let data = "x\n1\n2\n3\n4\n";
        assert!(matches!(read_series(data.as_bytes(), None), Err(CliError::Usage(_))));
        assert_eq!(read_series(data.as_bytes(), Some(0.1)).unwrap().step, 0.1);
    }

    #[test]
    fn bad_cells_name_the_line() {
        let err = read_series("x\n1\n2\nabc\n4\n".as_bytes(), Some(1.0)).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        assert!(matches!(err, CliError::Data(_)));
    }

    #[test]
    fn uneven_spacing_and_conflicting_h() {
        assert!(read_series("t,x\n0,1\n1,2\n2.5,3\n3.5,4\n".as_bytes(), None).is_err());
        assert!(read_series("t,x\n0,1\n1,2\n2,3\n3,4\n".as_bytes(), Some(0.5)).is_err());
        assert!(read_series("t,x\n0,1\n1,2\n2,3\n3,4\n".as_bytes(), Some(1.0)).is_ok());
        assert!(read_series("a,b\n0,1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn round_trip() {
        let p = SamplePath::new(0.25, vec![0.0, 1.5, -2.0, 3.25]).unwrap();
        let mut buf = Vec::new();
        write_series(&mut buf, &p).unwrap();
        assert_eq!(read_series(buf.as_slice(), None).unwrap(), p);
    }
}
