//! TRN text format.
//!
//! Line 1 is the header `TRN 1 <n>` (format tag, version, order); lines
//! 2 through n+1 hold exactly n characters from `{0, 1}` each, row i
//! listing the out-arcs of vertex i. Newlines are LF and a trailing
//! newline is required.

use std::fmt;

use thiserror::Error;

use crate::error::Result;
use crate::tournament::{Tournament, Violation};

/// Parser guard against absurd headers.
const MAX_ORDER: usize = 16_384;

#[derive(Debug, Error)]
pub enum TrnError {
    #[error("line 1: malformed header {found:?}, expected \"TRN 1 <n>\"")]
    Header { found: String },
    #[error("line 1: order {n} out of range [1, {MAX_ORDER}]")]
    Order { n: usize },
    #[error("line {line}: expected {expected} characters, found {found}")]
    LineLength { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {col}: invalid character {ch:?}, expected '0' or '1'")]
    BadChar { line: usize, col: usize, ch: char },
    #[error("expected {expected} data lines, found {found}")]
    LineCount { expected: usize, found: usize },
    #[error("missing trailing newline")]
    MissingNewline,
    #[error("{}", format_invariants(.0))]
    Invariants(Vec<(usize, usize, Violation)>),
}

fn format_invariants(items: &[(usize, usize, Violation)]) -> String {
    struct List<'a>(&'a [(usize, usize, Violation)]);
    impl fmt::Display for List<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            for (idx, (line, col, v)) in self.0.iter().take(8).enumerate() {
                if idx > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "line {line}, column {col}: {v}")?;
            }
            if self.0.len() > 8 {
                write!(f, "; ... ({} total)", self.0.len())?;
            }
            Ok(())
        }
    }
    List(items).to_string()
}

/// Serializes a tournament in TRN format. Deterministic: parsing the
/// output and re-serializing reproduces the bytes exactly.
pub fn write_trn(t: &Tournament) -> String {
    let n = t.n();
    let mut out = String::with_capacity(16 + n * (n + 1));
    out.push_str(&format!("TRN 1 {n}\n"));
    for i in 0..n {
        for j in 0..n {
            out.push(if i != j && t.arc(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Parses TRN text into a validated tournament.
pub fn read_trn(input: &str) -> Result<Tournament> {
    if !input.ends_with('\n') {
        return Err(TrnError::MissingNewline.into());
    }
    let mut lines = input[..input.len() - 1].split('\n');
    let header = lines.next().unwrap_or("");
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 3 || parts[0] != "TRN" || parts[1] != "1" {
        return Err(TrnError::Header {
            found: header.to_string(),
        }
        .into());
    }
    let n: usize = parts[2].parse().map_err(|_| TrnError::Header {
        found: header.to_string(),
    })?;
    if n == 0 || n > MAX_ORDER {
        return Err(TrnError::Order { n }.into());
    }

    let data: Vec<&str> = lines.collect();
    if data.len() != n {
        return Err(TrnError::LineCount {
            expected: n,
            found: data.len(),
        }
        .into());
    }

    let mut bits = vec![false; n * n];
    for (i, row) in data.iter().enumerate() {
        let line = i + 2;
        if row.len() != n {
            return Err(TrnError::LineLength {
                line,
                expected: n,
                found: row.chars().count(),
            }
            .into());
        }
        for (j, ch) in row.bytes().enumerate() {
            match ch {
                b'0' => {}
                b'1' => bits[i * n + j] = true,
                _ => {
                    return Err(TrnError::BadChar {
                        line,
                        col: j + 1,
                        ch: row[j..].chars().next().unwrap_or('?'),
                    }
                    .into())
                }
            }
        }
    }

    let violations = Tournament::validate_raw(n, |i, j| bits[i * n + j]);
    if !violations.is_empty() {
        let located = violations
            .into_iter()
            .map(|v| match v {
                Violation::SelfLoop { v: x } => (x + 2, x + 1, Violation::SelfLoop { v: x }),
                Violation::BothArcs { i, j } => (i + 2, j + 1, Violation::BothArcs { i, j }),
                Violation::NoArc { i, j } => (i + 2, j + 1, Violation::NoArc { i, j }),
            })
            .collect();
        return Err(TrnError::Invariants(located).into());
    }

    Tournament::from_orientation(n, |i, j| bits[i * n + j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_trn() -> &'static str {
        "TRN 1 3\n010\n001\n100\n"
    }

    #[test]
    fn reads_cyclic_triangle() {
        let t = read_trn(triangle_trn()).unwrap();
        assert_eq!(t.n(), 3);
        assert!(t.arc(0, 1) && t.arc(1, 2) && t.arc(2, 0));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let t = read_trn(triangle_trn()).unwrap();
        assert_eq!(write_trn(&t), triangle_trn());
    }

    #[test]
    fn unoriented_pair_reported_with_position() {
        // "01\n00" orients the single pair, so it parses.
        assert!(read_trn("TRN 1 2\n01\n00\n").is_ok());
        let err = read_trn("TRN 1 2\n00\n00\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2, column 2") && msg.contains("unoriented"), "{msg}");
        let err = read_trn("TRN 1 2\n01\n10\n").unwrap_err();
        assert!(err.to_string().contains("both ways"), "{err}");
    }

    #[test]
    fn header_and_shape_errors() {
        assert!(read_trn("TRX 1 3\n010\n001\n100\n").is_err());
        assert!(read_trn("TRN 2 3\n010\n001\n100\n").is_err());
        assert!(read_trn("TRN 1 3\n01\n001\n100\n").is_err());
        assert!(read_trn("TRN 1 3\n010\n001\n").is_err());
        assert!(read_trn("TRN 1 3\n010\n001\n100").is_err());
        let err = read_trn("TRN 1 3\n010\n0x1\n100\n").unwrap_err();
        assert!(err.to_string().contains("line 3, column 2"), "{err}");
    }
}
