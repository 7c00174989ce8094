//! Plain-text matrix files: a `rows cols` header line followed by the
//! entries in column-major order, one per line, at 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(24 * m.as_slice().len() + 32);
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for v in m.as_slice() {
        out.push_str(&format!("{v:.16e}\n"));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut tokens = text.split_whitespace();
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let values = tokens
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad value {t:?}: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} values, found {}",
            rows * cols,
            values.len()
        )));
    }
    DenseMatrix::from_col_major(rows, cols, values)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_matrix(m).as_bytes())?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}
