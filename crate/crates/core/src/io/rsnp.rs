//! `RSNP1` binary snapshot format, little-endian:
//! 5 magic bytes `RSNP1`, `u64` field dimension `N`, `u64` snapshot count
//! `Ns`, then `N * Ns` `f64` values in column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

pub const MAGIC: &[u8; 5] = b"RSNP1";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub(crate) fn write_matrix<T: Real, W: Write>(w: &mut W, m: &DMatrix<T>) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            w.write_all(&to_f64(m[(i, j)]).to_le_bytes())?;
        }
    }
    Ok(())
}

pub(crate) fn read_matrix<R: Read>(r: &mut R) -> std::io::Result<std::result::Result<DMatrix<f64>, String>> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Ok(Err(format!(
            "bad magic {:?}; expected RSNP1",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let n = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)?;
    let ns = u64::from_le_bytes(buf8) as usize;
    if n == 0 || ns == 0 || n.checked_mul(ns).is_none() {
        return Ok(Err(format!("invalid dimensions {n} x {ns}")));
    }
    let mut data = Vec::with_capacity(n * ns);
    for _ in 0..n * ns {
        r.read_exact(&mut buf8)?;
        data.push(f64::from_le_bytes(buf8));
    }
    Ok(Ok(DMatrix::from_vec(n, ns, data)))
}

/// Writes a field matrix (`N x Ns`, snapshots as columns) to an `RSNP1` file.
pub fn write_rsnp_file<T: Real>(path: &Path, fields: &DMatrix<T>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write_matrix(&mut w, fields).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads an `RSNP1` file back into an `N x Ns` matrix.
pub fn read_rsnp_file(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    match read_matrix(&mut r).map_err(|e| io_err(path, e))? {
        Ok(m) => Ok(m),
        Err(message) => Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            column: 1,
            message,
        }),
    }
}

/// Reads a snapshot matrix from either supported format, sniffing the
/// `RSNP1` magic bytes and falling back to CSV.
pub fn read_snapshot_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut magic = [0u8; 5];
    let is_binary = match file.read(&mut magic) {
        Ok(5) => &magic == MAGIC,
        Ok(_) => false,
        Err(e) => return Err(io_err(path, e)),
    };
    drop(file);
    if is_binary {
        read_rsnp_file(path)
    } else {
        super::csv::read_snapshot_csv(path)
    }
}
