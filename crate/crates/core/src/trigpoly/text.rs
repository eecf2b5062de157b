//! Plain-text polynomial format:
//!
//! ```text
//! # optional comment lines
//! d=2
//! k_1 k_2 re im
//! ...
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;

use super::TrigPolynomial;
use crate::error::{Error, Result};

pub fn parse(input: &str) -> Result<TrigPolynomial> {
    let mut d: Option<usize> = None;
    let mut terms = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(dim) = d else {
            let value = line
                .strip_prefix("d=")
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected `d=<int>`, got `{line}`") })?;
            let dim: usize = value
                .trim()
                .parse()
                .map_err(|e| Error::Parse { line: line_no, msg: format!("bad dimension: {e}") })?;
            if dim == 0 {
                return Err(Error::Parse { line: line_no, msg: "dimension must be positive".into() });
            }
            d = Some(dim);
            continue;
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim + 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} fields, got {}", dim + 2, fields.len()),
            });
        }
        let k = fields[..dim]
            .iter()
            .map(|f| f.parse::<i64>())
            .collect::<std::result::Result<Vec<i64>, _>>()
            .map_err(|e| Error::Parse { line: line_no, msg: format!("bad frequency: {e}") })?;
        let re: f64 = fields[dim]
            .parse()
            .map_err(|e| Error::Parse { line: line_no, msg: format!("bad real part: {e}") })?;
        let im: f64 = fields[dim + 1]
            .parse()
            .map_err(|e| Error::Parse { line: line_no, msg: format!("bad imaginary part: {e}") })?;
        terms.push((k, Complex64::new(re, im)));
    }
    let d = d.ok_or(Error::Parse { line: 0, msg: "missing `d=<int>` header".into() })?;
    TrigPolynomial::from_terms(d, terms)
}

/// Writes `f` with the given comment lines (each prefixed by `# `).
pub fn write(f: &TrigPolynomial, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "d={}", f.dim());
    for (k, c) in f.iter() {
        for kj in k {
            let _ = write!(out, "{kj} ");
        }
        let _ = writeln!(out, "{} {}", c.re, c.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_sums_duplicates() {
        let f = parse("# hello\nd=2\n1 -2 0.5 0\n\n1 -2 0.25 1\n3 4 -1 0\n").unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(f.coeff(&[1, -2]), Complex64::new(0.75, 1.0));
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse("1 2 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("d=2\n1 2 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("d=1\nx 0 0\n"), Err(Error::Parse { .. })));
        assert!(parse("").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let f = parse("d=1\n-3 0.1 -0.30000000000000004\n7 1e-300 2.5\n").unwrap();
        let again = parse(&write(&f, &["note".into()])).unwrap();
        assert_eq!(f, again);
    }
}
