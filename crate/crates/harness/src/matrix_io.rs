//! Plain text matrices: a `rows cols` header line, then one line per row with
//! space-separated entries at 17 significant digits.

use std::fmt::Write as _;

use augkrylov::DenseMatrix;

use crate::HarnessError;

pub fn write_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

/// Reads the format of [`write_matrix`]; any whitespace layout of the entries is accepted.
pub fn read_matrix(text: &str) -> Result<DenseMatrix, HarnessError> {
    let bad = |msg: String| HarnessError::Format(msg);
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize, HarnessError> {
        let t = tokens.next().ok_or_else(|| bad(format!("missing {what}")))?;
        t.parse().map_err(|_| bad(format!("invalid {what} '{t}'")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let values = tokens
        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("invalid entry '{t}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != rows * cols {
        return Err(bad(format!("expected {} entries, found {}", rows * cols, values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite entry".into()));
    }
    Ok(DenseMatrix::from_row_major(rows, cols, &values)?)
}
