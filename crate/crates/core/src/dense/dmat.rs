//! DMAT binary matrix files.
//!
//! Layout: the 6 magic bytes `DMAT1\n`, rows and cols as little-endian `u64`,
//! then `rows * cols` little-endian IEEE-754 binary64 values in row-major
//! order. Nothing follows the payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::matrix::DenseMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"DMAT1\n";
const HEADER_LEN: u64 = 6 + 8 + 8;

pub fn write_dmat_to<W: Write>(mut w: W, a: &DenseMatrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(a.rows() as u64).to_le_bytes())?;
    w.write_all(&(a.cols() as u64).to_le_bytes())?;
    for x in a.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()
}

pub fn write_dmat(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    write_dmat_to(BufWriter::new(file), a).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a DMAT stream; `name` labels diagnostics.
pub fn read_dmat_from<R: Read>(mut r: R, name: &Path) -> Result<DenseMatrix> {
    let fmt_err = |offset: u64, msg: String| Error::Format {
        path: name.to_path_buf(),
        offset,
        msg,
    };

    let mut header = [0u8; HEADER_LEN as usize];
    let got = read_full(&mut r, &mut header).map_err(|source| Error::File {
        path: name.to_path_buf(),
        source,
    })?;
    if got < MAGIC.len() || &header[..6] != MAGIC {
        let offset = header[..got.min(6)]
            .iter()
            .zip(MAGIC)
            .position(|(a, b)| a != b)
            .unwrap_or(got.min(6));
        return Err(fmt_err(offset as u64, "bad magic, expected \"DMAT1\\n\"".into()));
    }
    if got < HEADER_LEN as usize {
        return Err(fmt_err(got as u64, "truncated header".into()));
    }
    let rows = u64::from_le_bytes(header[6..14].try_into().unwrap());
    let cols = u64::from_le_bytes(header[14..22].try_into().unwrap());
    if rows == 0 || cols == 0 {
        return Err(fmt_err(6, format!("dimensions must be positive, got {rows}x{cols}")));
    }
    let count = rows
        .checked_mul(cols)
        .filter(|c| c.checked_mul(8).is_some() && *c <= usize::MAX as u64)
        .ok_or_else(|| fmt_err(6, format!("dimensions {rows}x{cols} overflow")))?;

    let mut data = Vec::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut remaining = count * 8;
    let mut offset = HEADER_LEN;
    while remaining > 0 {
        let want = remaining.min(buf.len() as u64) as usize;
        let got = read_full(&mut r, &mut buf[..want]).map_err(|source| Error::File {
            path: name.to_path_buf(),
            source,
        })?;
        if got < want {
            return Err(fmt_err(
                offset + got as u64,
                format!("truncated payload, expected {} value bytes", count * 8),
            ));
        }
        data.extend(buf[..got].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())));
        remaining -= got as u64;
        offset += got as u64;
    }
    let mut probe = [0u8; 1];
    if read_full(&mut r, &mut probe).map_err(|source| Error::File {
        path: name.to_path_buf(),
        source,
    })? != 0
    {
        return Err(fmt_err(offset, "trailing bytes after payload".into()));
    }
    DenseMatrix::from_vec(rows as usize, cols as usize, data).map_err(|e| fmt_err(6, e.to_string()))
}

pub fn read_dmat(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_dmat_from(BufReader::new(file), path)
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}
