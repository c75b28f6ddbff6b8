//! Plain-text formats for opinions and trajectories.
//!
//! Opinions are CSV with an `index,value` header and one row per node.
//! Floats are written with Rust's shortest round-trip formatting, so
//! writing and re-reading is lossless and output is byte-stable.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Version tag carried by every JSON document the CLI writes.
pub const SCHEMA_VERSION: &str = "1.0";

/// Parses an `index,value` CSV. Rows may come in any order but every index
/// in `0..n` must appear exactly once. Blank lines and `#` comments are
/// skipped.
pub fn parse_opinions(text: &str) -> Result<Vec<f64>> {
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    let mut header_seen = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["index", "value"] {
                return Err(Error::MalformedLine {
                    line: line_no,
                    reason: "expected header `index,value`".into(),
                });
            }
            header_seen = true;
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(i), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: "expected two columns".into(),
            });
        };
        let index: usize = i.parse().map_err(|_| Error::MalformedLine {
            line: line_no,
            reason: format!("bad index `{i}`"),
        })?;
        let value: f64 = v.parse().map_err(|_| Error::MalformedLine {
            line: line_no,
            reason: format!("bad value `{v}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: format!("non-finite value `{v}`"),
            });
        }
        rows.push((line_no, index, value));
    }
    if !header_seen {
        return Err(Error::MalformedLine {
            line: 1,
            reason: "missing header `index,value`".into(),
        });
    }
    let n = rows.len();
    let mut out = vec![f64::NAN; n];
    for (line, index, value) in rows {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
        if !out[index].is_nan() {
            return Err(Error::MalformedLine {
                line,
                reason: format!("index {index} repeated"),
            });
        }
        out[index] = value;
    }
    Ok(out)
}

pub fn write_opinions(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v}").expect("writing to a String");
    }
    out
}

/// Long-format trajectory: one `step,index,value` row per node per step.
pub fn write_trajectory(t: &Trajectory) -> String {
    let mut out = String::from("step,index,value\n");
    for (step, z) in t.steps.iter().enumerate() {
        for (i, v) in z.iter().enumerate() {
            writeln!(out, "{step},{i},{v}").expect("writing to a String");
        }
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fj_iterate;
    use crate::graph::Graph;

    #[test]
    fn round_trip() {
        let v = vec![0.1, 1.0 / 3.0, 0.0, 1.0];
        assert_eq!(parse_opinions(&write_opinions(&v)).unwrap(), v);
    }

    #[test]
    fn rows_in_any_order() {
        let v = parse_opinions("# s\nindex,value\n1,0.5\n\n0, 0.25\n").unwrap();
        assert_eq!(v, vec![0.25, 0.5]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_opinions("0,0.5\n").is_err());
        assert!(parse_opinions("").is_err());
        assert!(parse_opinions("index,value\n0,x\n").is_err());
        assert!(parse_opinions("index,value\n0,0.1,3\n").is_err());
        assert!(parse_opinions("index,value\n0,0.1\n0,0.2\n").is_err());
        assert!(matches!(
            parse_opinions("index,value\n0,0.1\n5,0.2\n"),
            Err(Error::IndexOutOfRange { index: 5, n: 2 })
        ));
        assert!(parse_opinions("index,value\n0,NaN\n").is_err());
    }

    #[test]
    fn trajectory_has_one_row_per_node_and_step() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let t = fj_iterate(&g, &[0.0, 1.0], &[0.0, 1.0], 1e-3, 3).unwrap();
        let csv = write_trajectory(&t);
        assert_eq!(csv.lines().count(), 1 + 2 * t.steps.len());
        assert!(csv.starts_with("step,index,value\n0,0,0\n0,1,1\n1,0,0.5\n"));
    }
}
