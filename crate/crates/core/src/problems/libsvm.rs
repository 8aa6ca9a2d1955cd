use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Point};

/// Reads a LIBSVM file into a dense feature matrix and a label vector.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<(DenseMatrix, Point)> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text)
}

/// Parses `label idx:val ...` lines; indices are 1-based, `#` starts a comment.
pub fn parse_libsvm(text: &str) -> Result<(DenseMatrix, Point)> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = parse_real(label_tok, line, "label")?;
        let mut entries = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected index:value, got '{tok}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid feature index '{idx}'"),
            })?;
            if idx == 0 {
                return Err(Error::Parse { line, message: "feature indices are 1-based".into() });
            }
            if idx <= last {
                return Err(Error::Parse { line, message: format!("feature index {idx} is not increasing") });
            }
            last = idx;
            entries.push((idx - 1, parse_real(val, line, "feature value")?));
            width = width.max(idx);
        }
        labels.push(label);
        rows.push(entries);
    }
    if labels.is_empty() {
        return Err(Error::config("LIBSVM input contains no data lines"));
    }
    if width == 0 {
        return Err(Error::config("LIBSVM input contains no features"));
    }
    let mut m = DenseMatrix::zeros(labels.len(), width);
    for (i, entries) in rows.into_iter().enumerate() {
        for (j, v) in entries {
            m[(i, j)] = v;
        }
    }
    Ok((m, Point::from_vec(labels)))
}

fn parse_real(tok: &str, line: usize, what: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse { line, message: format!("invalid {what} '{tok}'") }),
    }
}

/// Serializes nonzero entries in LIBSVM format; the shortest round-trip
/// decimal form is used so reloading is exact.
pub fn to_libsvm_string(features: &DenseMatrix, labels: &Point) -> String {
    let mut out = String::new();
    for i in 0..features.rows() {
        write!(out, "{}", labels[i]).expect("write to string");
        for (j, v) in features.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", j + 1, v).expect("write to string");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_examples() {
        let (x, y) = parse_libsvm("1 1:0.5 3:2\n-1 2:1 # trailing comment\n").unwrap();
        assert_eq!(x.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(x.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(y.as_slice(), &[1.0, -1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_libsvm("1 1:0.5\n\n2 x:3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_libsvm("# only a comment\n"), Err(Error::Config(_))));
        assert!(matches!(parse_libsvm("1 0:1\n"), Err(Error::Parse { line: 1, .. })));
    }
}
