//! Matrix files.
//!
//! CSV: the first record holds the column count `c`; every following
//! non-empty record holds exactly `c` comma-separated values, one matrix row
//! per record. Lines starting with `#` are ignored. A vector is a matrix
//! with one column.
//!
//! KRN1: the bytes `KRN1`, the row count and the column count as
//! little-endian `u64`, then `rows·cols` little-endian `f64` in row-major
//! order.
//!
//! [`read_matrix`] tells the two apart by the magic bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{io_err, Error, Result};

pub const KRN1_MAGIC: &[u8; 4] = b"KRN1";

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut file = File::open(path).map_err(io_err(path))?;
    let mut head = [0u8; 4];
    let n = read_up_to(&mut file, &mut head).map_err(io_err(path))?;
    if n == 4 && &head == KRN1_MAGIC {
        read_krn1(path)
    } else {
        read_csv_matrix(path)
    }
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let k = r.read(&mut buf[filled..])?;
        if k == 0 {
            break;
        }
        filled += k;
    }
    Ok(filled)
}

/// A column vector file (one column).
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Error::Format {
            path: path.into(),
            message: format!("expected a single column, found {}", m.ncols()),
        });
    }
    Ok(m.as_slice().to_vec())
}

pub fn read_csv_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.into(),
        line,
        message,
    };
    let mut cols: Option<usize> = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => {
                if record.len() != 1 {
                    return Err(parse_err(line, "first record must be the column count".into()));
                }
                let c: usize = record[0]
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad column count {:?}", &record[0])))?;
                if c == 0 {
                    return Err(parse_err(line, "column count must be positive".into()));
                }
                cols = Some(c);
            }
            Some(c) => {
                if record.len() != c {
                    return Err(parse_err(line, format!("expected {c} values, found {}", record.len())));
                }
                for field in record.iter() {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad number {field:?}")))?;
                    data.push(v);
                }
                rows += 1;
            }
        }
    }
    let cols = cols.ok_or_else(|| Error::Format {
        path: path.into(),
        message: "empty file".into(),
    })?;
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn write_csv_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{}", m.ncols())?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if j > 0 {
                    w.write_all(b",")?;
                }
                // `{}` prints the shortest string that round-trips
                write!(w, "{}", m[(i, j)])?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}

pub fn write_csv_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_csv_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v))
}

pub fn read_krn1(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let format_err = |message: String| Error::Format {
        path: path.into(),
        message,
    };
    let mut header = [0u8; 20];
    if read_up_to(&mut r, &mut header).map_err(io_err(path))? < 20 {
        return Err(format_err("truncated KRN1 header".into()));
    }
    if &header[..4] != KRN1_MAGIC {
        return Err(format_err("missing KRN1 magic".into()));
    }
    let rows = u64::from_le_bytes(header[4..12].try_into().unwrap());
    let cols = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let len = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| format_err(format!("shape {rows}x{cols} is too large")))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err(path))?;
    if bytes.len() != len * 8 {
        return Err(format_err(format!(
            "payload has {} bytes, shape {rows}x{cols} needs {}",
            bytes.len(),
            len * 8
        )));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DMatrix::from_row_slice(rows as usize, cols as usize, &data))
}

pub fn write_krn1(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        w.write_all(KRN1_MAGIC)?;
        w.write_all(&(m.nrows() as u64).to_le_bytes())?;
        w.write_all(&(m.ncols() as u64).to_le_bytes())?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.write_all(&m[(i, j)].to_le_bytes())?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}

/// Writes by extension: `.krn` or `.krn1` as KRN1, anything else as CSV.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("krn") | Some("krn1") => write_krn1(path, m),
        _ => write_csv_matrix(path, m),
    }
}
