//! Plain-text matrix files.
//!
//! ```text
//! sym 4            herm 2
//! 1 0 0 0          1,0 0,1
//! 0 1 0 0          0,-1 4,0
//! 0 0 1 0
//! 0 0 0 1
//! ```
//!
//! Line 1 names the kind and size (`sym <2n>` or `herm <n>`); each following
//! non-blank line is one row of whitespace-separated decimals, with `re,im`
//! pairs for `herm`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, ParseError, Result};
use crate::matrix::{embed, HermitianMatrix, SymmetricMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixInput {
    Symmetric(SymmetricMatrix),
    Hermitian(HermitianMatrix),
}

impl MatrixInput {
    pub fn into_symmetric(self) -> SymmetricMatrix {
        match self {
            MatrixInput::Symmetric(m) => m,
            MatrixInput::Hermitian(h) => embed(&h),
        }
    }
}

pub fn read_matrix_file(path: &Path) -> Result<MatrixInput> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

fn parse_number(tok: &str, line: usize, col: usize) -> Result<f64, ParseError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| ParseError::at(line, col, format!("invalid number `{tok}`")))?;
    if !v.is_finite() {
        return Err(ParseError::at(
            line,
            col,
            format!("non-finite number `{tok}`"),
        ));
    }
    Ok(v)
}

/// Parses the text format. Shape errors are [`Error::Parse`]; a well-formed
/// file whose content violates symmetry or dimension limits yields the
/// corresponding validation error.
pub fn parse_matrix(text: &str) -> Result<MatrixInput> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty matrix file"))?;
    let mut head = header.split_whitespace();
    let kind = head.next().unwrap_or_default();
    let size_tok = head
        .next()
        .ok_or_else(|| ParseError::at(hline, 2, "missing matrix size"))?;
    if head.next().is_some() {
        return Err(ParseError::at(hline, 3, "unexpected token after matrix size").into());
    }
    let size: usize = size_tok
        .parse()
        .map_err(|_| ParseError::at(hline, 2, format!("invalid size `{size_tok}`")))?;
    if size == 0 {
        return Err(ParseError::at(hline, 2, "matrix size must be positive").into());
    }
    let hermitian = match kind {
        "sym" => false,
        "herm" => true,
        other => {
            return Err(ParseError::at(
                hline,
                1,
                format!("unknown matrix kind `{other}` (expected `sym` or `herm`)"),
            )
            .into())
        }
    };

    let mut re = Vec::with_capacity(size * size);
    let mut im = Vec::with_capacity(size * size);
    let mut row = 0;
    let mut last_line = hline;
    for (lineno, text) in lines {
        last_line = lineno;
        row += 1;
        if row > size {
            return Err(
                ParseError::new(lineno, format!("extra row {row}: expected {size} rows")).into(),
            );
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != size {
            return Err(ParseError::new(
                lineno,
                format!("row {row}: expected {size} entries, found {}", toks.len()),
            )
            .into());
        }
        for (c, tok) in toks.iter().enumerate() {
            let col = c + 1;
            if hermitian {
                let (a, b) = tok.split_once(',').ok_or_else(|| {
                    ParseError::at(lineno, col, format!("expected `re,im` pair, found `{tok}`"))
                })?;
                re.push(parse_number(a, lineno, col)?);
                im.push(parse_number(b, lineno, col)?);
            } else {
                re.push(parse_number(tok, lineno, col)?);
            }
        }
    }
    if row < size {
        return Err(ParseError::new(
            last_line + 1,
            format!(
                "row {}: missing (expected {size} rows, found {row})",
                row + 1
            ),
        )
        .into());
    }

    if hermitian {
        Ok(MatrixInput::Hermitian(HermitianMatrix::new(size, re, im)?))
    } else {
        Ok(MatrixInput::Symmetric(SymmetricMatrix::from_row_major(
            size, re,
        )?))
    }
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_symmetric(m: &SymmetricMatrix) -> String {
    let mut out = format!("sym {}\n", m.dim());
    for r in m.rows() {
        let row: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn format_hermitian(h: &HermitianMatrix) -> String {
    let n = h.n();
    let mut out = format!("herm {n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let (a, b) = h.get(i, j);
                format!("{},{}", fmt_f64(a), fmt_f64(b))
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_symmetric() {
        let m = parse_matrix("sym 2\n4 0\n0 4\n").unwrap().into_symmetric();
        assert_eq!(m, SymmetricMatrix::scaled_identity(2, 4.0));
    }

    #[test]
    fn parses_hermitian_and_embeds() {
        let m = parse_matrix("herm 2\n1,0 0,1\n0,-1 4,0\n").unwrap();
        let MatrixInput::Hermitian(h) = &m else {
            panic!("kind")
        };
        assert_eq!(h.get(0, 1), (0.0, 1.0));
        assert_eq!(m.into_symmetric().get(2, 1), 1.0);
    }

    #[test]
    fn short_row_names_the_row() {
        let err = parse_matrix("sym 2\n1 0\n0 1 5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2: expected 2 entries"), "{msg}");
        assert!(msg.starts_with("line 3"), "{msg}");
    }

    #[test]
    fn bad_token_has_column() {
        let Error::Parse(p) = parse_matrix("sym 2\n1 x\n0 1\n").unwrap_err() else {
            panic!("kind")
        };
        assert_eq!((p.line, p.column), (2, Some(2)));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(parse_matrix(""), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("mat 2\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("sym 2\n1 0\n"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_matrix("sym 2\n1 0\n0 1\n1 1\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(parse_matrix("herm 1\n1\n"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_matrix("sym 3\n1 0 0\n0 1 0\n0 0 1\n"),
            Err(Error::InvalidDimension(3))
        ));
        assert!(matches!(
            parse_matrix("sym 2\n1 2\n3 1\n"),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn formatting_round_trips_exactly() {
        let m = SymmetricMatrix::from_fn(4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let back = parse_matrix(&format_symmetric(&m))
            .unwrap()
            .into_symmetric();
        assert_eq!(back, m);
        let h = HermitianMatrix::new(
            2,
            vec![1.0, 0.1, 0.1, 2.0],
            vec![0.0, 1.0 / 3.0, -1.0 / 3.0, 0.0],
        )
        .unwrap();
        let MatrixInput::Hermitian(back) = parse_matrix(&format_hermitian(&h)).unwrap() else {
            panic!("kind")
        };
        assert_eq!(back, h);
    }
}
