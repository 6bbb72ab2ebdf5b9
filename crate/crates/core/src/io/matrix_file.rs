//! Plain-text matrix interchange.
//!
//! ```text
//! rows cols
//! re im  re im  ...      (one line per row)
//! ```
//!
//! Numbers are written with 17 significant digits so that a write/read
//! round trip is bit-exact. The reader only needs whitespace separation and
//! ignores line structure.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::numcore::ComplexMatrix;

/// Largest entry count accepted by [`parse_matrix`].
pub const MAX_ENTRIES: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixFileError {
    #[error("missing matrix header `rows cols`")]
    MissingHeader,
    #[error("invalid dimension `{0}` in header")]
    BadDimension(String),
    #[error("matrix of {rows}x{cols} exceeds the supported size")]
    TooLarge { rows: usize, cols: usize },
    #[error("invalid number `{token}` at value {position}")]
    BadNumber { token: String, position: usize },
    #[error("non-finite value `{token}` at value {position}")]
    NonFinite { token: String, position: usize },
    #[error("expected {expected} values after the header, found {found}")]
    WrongCount { expected: usize, found: usize },
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, MatrixFileError> {
    let mut tokens = text.split_whitespace();
    let mut dim = || -> Result<usize, MatrixFileError> {
        let t = tokens.next().ok_or(MatrixFileError::MissingHeader)?;
        t.parse().map_err(|_| MatrixFileError::BadDimension(t.to_string()))
    };
    let rows = dim()?;
    let cols = dim()?;
    let count = rows
        .checked_mul(cols)
        .filter(|&c| c <= MAX_ENTRIES)
        .ok_or(MatrixFileError::TooLarge { rows, cols })?;

    let mut values = Vec::with_capacity(2 * count);
    for (position, token) in tokens.enumerate() {
        let v: f64 = token.parse().map_err(|_| MatrixFileError::BadNumber {
            token: token.to_string(),
            position,
        })?;
        if !v.is_finite() {
            return Err(MatrixFileError::NonFinite {
                token: token.to_string(),
                position,
            });
        }
        if values.len() == 2 * count {
            return Err(MatrixFileError::WrongCount {
                expected: 2 * count,
                found: position + 1,
            });
        }
        values.push(v);
    }
    if values.len() != 2 * count {
        return Err(MatrixFileError::WrongCount {
            expected: 2 * count,
            found: values.len(),
        });
    }
    let entries = values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    Ok(ComplexMatrix::new(rows, cols, entries).expect("entry count checked above"))
}

/// Canonical text form; equal matrices give identical bytes.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::with_capacity(48 * m.rows() * m.cols() + 16);
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, z) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            // -0.0 and 0.0 compare equal, so print them the same way
            let _ = write!(out, "{:.16e} {:.16e}", z.re + 0.0, z.im + 0.0);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = ComplexMatrix::from_fn(3, 2, |i, j| {
            Complex64::new((i as f64 + 0.1).sqrt() / 3.0, -(j as f64 + 1.0).ln() * 1e-300)
        });
        let text = format_matrix(&m);
        let back = parse_matrix(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(format_matrix(&back), text);
    }

    #[test]
    fn canonical_layout() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, -0.0], &[0.5, 2.0]]);
        assert_eq!(
            format_matrix(&m),
            "2 2\n1.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0\n\
             5.0000000000000000e-1 0.0000000000000000e0 2.0000000000000000e0 0.0000000000000000e0\n"
        );
    }

    #[test]
    fn loose_whitespace() {
        let m = parse_matrix("  1\n1\t\n 3.5   -1e-3 ").unwrap();
        assert_eq!(m[(0, 0)], Complex64::new(3.5, -1e-3));
        assert_eq!(parse_matrix("0 0").unwrap().rows(), 0);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_matrix(""), Err(MatrixFileError::MissingHeader));
        assert_eq!(parse_matrix("2"), Err(MatrixFileError::MissingHeader));
        assert!(matches!(parse_matrix("2 x"), Err(MatrixFileError::BadDimension(_))));
        assert!(matches!(parse_matrix("-1 2"), Err(MatrixFileError::BadDimension(_))));
        assert!(matches!(
            parse_matrix("1 1 1.0"),
            Err(MatrixFileError::WrongCount { expected: 2, found: 1 })
        ));
        assert!(matches!(
            parse_matrix("1 1 1 2 3"),
            Err(MatrixFileError::WrongCount { expected: 2, found: 3 })
        ));
        assert!(matches!(parse_matrix("1 1 nan 0"), Err(MatrixFileError::NonFinite { .. })));
        assert!(matches!(parse_matrix("1 1 inf 0"), Err(MatrixFileError::NonFinite { .. })));
        assert!(matches!(parse_matrix("1 1 1,5 0"), Err(MatrixFileError::BadNumber { .. })));
        assert!(matches!(
            parse_matrix("4294967296 4294967296"),
            Err(MatrixFileError::TooLarge { .. })
        ));
    }
}
