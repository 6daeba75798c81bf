//! Plain numeric CSV readers and writers.
//!
//! Layouts:
//! * parameter samples: header `mu_1,...,mu_p`, one sample per row,
//!   physical coordinates;
//! * snapshot matrix: no header, one snapshot per row (`Ns` rows by `N`
//!   columns);
//! * report tables as documented on each writer.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::param_space::{Coordinates, ParameterSamples};
use crate::scalar::{to_f64, Real};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

/// Parses a numeric table; every row must have the same field count.
/// Returns row-major data plus the column count.
fn read_numeric_table(path: &Path, skip_header: bool) -> Result<(Vec<Vec<f64>>, usize)> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (line_idx, line) in text.lines().enumerate() {
        if line_idx == 0 && skip_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col_idx, cell) in line.split(',').enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                parse_err(
                    path,
                    line_idx + 1,
                    col_idx + 1,
                    format!("'{}' is not a number", cell.trim()),
                )
            })?;
            row.push(value);
        }
        if width == 0 {
            width = row.len();
        } else if row.len() != width {
            return Err(parse_err(
                path,
                line_idx + 1,
                row.len(),
                format!("expected {width} fields, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.is_empty() || width == 0 {
        return Err(parse_err(path, 1, 1, "file holds no numeric rows"));
    }
    Ok((rows, width))
}

/// Writes parameter samples (physical coordinates), one per row.
pub fn write_params_csv<T: Real>(path: &Path, samples: &ParameterSamples<T>) -> Result<()> {
    let p = samples.dim();
    let mut out = String::new();
    let header: Vec<String> = (1..=p).map(|i| format!("mu_{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for j in 0..samples.len() {
        for i in 0..p {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_float(to_f64(samples.matrix()[(i, j)])));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Reads parameter samples written by [`write_params_csv`].
pub fn read_params_csv(path: &Path) -> Result<ParameterSamples<f64>> {
    let (rows, width) = read_numeric_table(path, true)?;
    let n = rows.len();
    let data = DMatrix::from_fn(width, n, |i, j| rows[j][i]);
    ParameterSamples::new(data, Coordinates::Physical)
}

/// Writes a snapshot matrix, one snapshot (column of `fields`) per CSV row.
pub fn write_snapshot_csv<T: Real>(path: &Path, fields: &DMatrix<T>) -> Result<()> {
    let mut out = String::new();
    for j in 0..fields.ncols() {
        for i in 0..fields.nrows() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_float(to_f64(fields[(i, j)])));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Reads a snapshot CSV back into column-per-snapshot order (`N x Ns`).
pub fn read_snapshot_csv(path: &Path) -> Result<DMatrix<f64>> {
    let (rows, width) = read_numeric_table(path, false)?;
    let ns = rows.len();
    Ok(DMatrix::from_fn(width, ns, |i, j| rows[j][i]))
}

/// Raw spectrum table: `index,singular_value`.
pub fn write_singular_values_csv<T: Real>(path: &Path, singular_values: &[T]) -> Result<()> {
    let mut out = String::from("index,singular_value\n");
    for (i, &sv) in singular_values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, fmt_float(to_f64(sv)));
    }
    write_text(path, &out)
}

/// Singular-value decay table: `index,singular_value,normalized_singular_value`.
pub fn write_decay_csv<T: Real>(path: &Path, singular_values: &[T]) -> Result<()> {
    let first = singular_values.first().map(|&x| to_f64(x)).unwrap_or(0.0);
    let mut out = String::from("index,singular_value,normalized_singular_value\n");
    for (i, &sv) in singular_values.iter().enumerate() {
        let sv = to_f64(sv);
        let normalized = if first > 0.0 { sv / first } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{}",
            i + 1,
            fmt_float(sv),
            fmt_float(normalized)
        );
    }
    write_text(path, &out)
}

/// Active-subspace spectrum table: `index,eigenvalue,normalized_eigenvalue`.
pub fn write_eigenvalue_csv<T: Real>(path: &Path, eigenvalues: &[T]) -> Result<()> {
    let first = eigenvalues.first().map(|&x| to_f64(x)).unwrap_or(0.0);
    let mut out = String::from("index,eigenvalue,normalized_eigenvalue\n");
    for (i, &ev) in eigenvalues.iter().enumerate() {
        let ev = to_f64(ev);
        let normalized = if first > 0.0 { ev / first } else { 0.0 };
        let _ = writeln!(out, "{},{},{}", i + 1, fmt_float(ev), fmt_float(normalized));
    }
    write_text(path, &out)
}

/// Sufficient-summary table: `active_coordinate,coefficient`, sorted rows.
pub fn write_summary_csv<T: Real>(path: &Path, table: &[(T, T)]) -> Result<()> {
    let mut out = String::from("active_coordinate,coefficient\n");
    for &(x, y) in table {
        let _ = writeln!(out, "{},{}", fmt_float(to_f64(x)), fmt_float(to_f64(y)));
    }
    write_text(path, &out)
}

/// Fold-level report: `n_samples,method,fold,relative_error`.
pub fn write_fold_report_csv<T: Real>(
    path: &Path,
    rows: &[(usize, &str, usize, T)],
) -> Result<()> {
    let mut out = String::from("n_samples,method,fold,relative_error\n");
    for &(n, method, fold, err) in rows {
        let _ = writeln!(out, "{n},{method},{fold},{}", fmt_float(to_f64(err)));
    }
    write_text(path, &out)
}

/// Summary report: `n_samples,method,mean_error`.
pub fn write_mean_report_csv<T: Real>(path: &Path, rows: &[(usize, &str, T)]) -> Result<()> {
    let mut out = String::from("n_samples,method,mean_error\n");
    for &(n, method, err) in rows {
        let _ = writeln!(out, "{n},{method},{}", fmt_float(to_f64(err)));
    }
    write_text(path, &out)
}

/// Plain field vector, one value per row with a `value` header.
pub fn write_field_csv<T: Real>(path: &Path, field: &[T]) -> Result<()> {
    let mut out = String::from("value\n");
    for &x in field {
        let _ = writeln!(out, "{}", fmt_float(to_f64(x)));
    }
    write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param_space::ParameterSpace;

    #[test]
    fn params_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.csv");
        let space = ParameterSpace::hypercube(5.0, 10.0, 4).unwrap();
        let samples = space.sample_uniform(17, 3).unwrap();
        write_params_csv(&path, &samples).unwrap();
        let back = read_params_csv(&path).unwrap();
        assert_eq!(back.dim(), 4);
        assert_eq!(back.len(), 17);
        assert_eq!(back.matrix(), samples.matrix());
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshots.csv");
        let fields = DMatrix::from_fn(7, 3, |i, j| (i as f64 - 2.5) * 10f64.powi(j as i32 - 1));
        write_snapshot_csv(&path, &fields).unwrap();
        let back = read_snapshot_csv(&path).unwrap();
        assert_eq!(back, fields);
    }

    #[test]
    fn parse_error_carries_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        match read_snapshot_csv(&path) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(read_snapshot_csv(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn decay_reports_normalized_first_entry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decay.csv");
        write_decay_csv(&path, &[4.0, 2.0, 1.0]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "index,singular_value,normalized_singular_value"
        );
        assert_eq!(lines.next().unwrap(), "1,4e0,1e0");
        assert_eq!(lines.next().unwrap(), "2,2e0,5e-1");
    }

    #[test]
    fn report_rows_format() {
        let dir = tempfile::tempdir().unwrap();
        let fold = dir.path().join("folds.csv");
        write_fold_report_csv(&fold, &[(20usize, "as-gpr", 0usize, 0.125f64)]).unwrap();
        let text = std::fs::read_to_string(&fold).unwrap();
        assert_eq!(text, "n_samples,method,fold,relative_error\n20,as-gpr,0,1.25e-1\n");
    }
}
