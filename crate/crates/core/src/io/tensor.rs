use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{io_error, parse_f64, parse_usize, CodecError};
use crate::corpus::{CoocTensor, Entry, TensorError};

pub const TEXT_MAGIC: &str = "COVER-COOC";
pub const BINARY_MAGIC: [u8; 4] = *b"CVRT";
pub const BINARY_VERSION: u16 = 1;
const TEXT_VERSION: &str = "1";
const HEADER_LEN: usize = 4 + 2 + 4 + 4 + 8;
const RECORD_LEN: usize = 4 + 4 + 4 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorFormat {
    Text,
    Binary,
}

impl TensorFormat {
    /// `.bin` means binary; anything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => TensorFormat::Binary,
            _ => TensorFormat::Text,
        }
    }
}

pub fn write_tensor_text<W: Write>(tensor: &CoocTensor, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TEXT_MAGIC} {TEXT_VERSION} {} {} {}", tensor.n(), tensor.m(), tensor.nnz())?;
    for e in tensor.entries() {
        writeln!(w, "{} {} {} {}", e.i, e.j, e.k, e.value)?;
    }
    w.flush()
}

fn check_entry(e: &Entry, n: usize, m: usize, line: usize) -> Result<(), CodecError> {
    if e.i as usize >= n || e.j as usize >= n || e.k as usize >= m {
        return Err(CodecError::IndexOutOfRange {
            line,
            msg: format!("({}, {}, {}) with n={n}, m={m}", e.i, e.j, e.k),
        });
    }
    if !(e.value > 0.0 && e.value.is_finite()) {
        return Err(CodecError::NonPositiveValue { line, value: e.value });
    }
    Ok(())
}

fn finish(n: usize, m: usize, entries: Vec<Entry>) -> Result<CoocTensor, CodecError> {
    CoocTensor::from_entries(n, m, entries).map_err(|e| match e {
        TensorError::OutOfRange { i, j, k, n, m } => CodecError::IndexOutOfRange {
            line: 0,
            msg: format!("({i}, {j}, {k}) with n={n}, m={m}"),
        },
        other => CodecError::Tensor(other),
    })
}

pub fn read_tensor_text<R: BufRead>(r: R) -> Result<CoocTensor, CodecError> {
    const FILE: &str = "tensor";
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| CodecError::Format(e.to_string()))?,
        None => return Err(CodecError::Truncated("missing header".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&TEXT_MAGIC) {
        return Err(CodecError::Format(format!("expected {TEXT_MAGIC} header, found '{header}'")));
    }
    if fields.len() != 5 || fields[1] != TEXT_VERSION {
        return Err(CodecError::Format(format!("unsupported header '{header}'")));
    }
    let n = parse_usize(fields[2], FILE, 1)?;
    let m = parse_usize(fields[3], FILE, 1)?;
    let nnz = parse_usize(fields[4], FILE, 1)?;
    let mut entries = Vec::with_capacity(nnz);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| CodecError::Format(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(CodecError::Parse {
                file: FILE.into(),
                line: line_no,
                msg: format!("expected 'i j k value', found '{line}'"),
            });
        }
        let e = Entry {
            i: parse_usize(parts[0], FILE, line_no)? as u32,
            j: parse_usize(parts[1], FILE, line_no)? as u32,
            k: parse_usize(parts[2], FILE, line_no)? as u32,
            value: parse_f64(parts[3], FILE, line_no)?,
        };
        check_entry(&e, n, m, line_no)?;
        entries.push(e);
    }
    if entries.len() < nnz {
        return Err(CodecError::Truncated(format!("header promises {nnz} entries, found {}", entries.len())));
    }
    if entries.len() > nnz {
        return Err(CodecError::Format(format!("header promises {nnz} entries, found {}", entries.len())));
    }
    finish(n, m, entries)
}

pub fn write_tensor_binary<W: Write>(tensor: &CoocTensor, mut w: W) -> std::io::Result<()> {
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&BINARY_VERSION.to_le_bytes())?;
    w.write_all(&(tensor.n() as u32).to_le_bytes())?;
    w.write_all(&(tensor.m() as u32).to_le_bytes())?;
    w.write_all(&(tensor.nnz() as u64).to_le_bytes())?;
    for e in tensor.entries() {
        w.write_all(&e.i.to_le_bytes())?;
        w.write_all(&e.j.to_le_bytes())?;
        w.write_all(&e.k.to_le_bytes())?;
        w.write_all(&e.value.to_le_bytes())?;
    }
    w.flush()
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().expect("4 bytes"))
}

pub fn read_tensor_binary<R: Read>(mut r: R) -> Result<CoocTensor, CodecError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| CodecError::Format(e.to_string()))?;
    if bytes.len() < 4 || bytes[..4] != BINARY_MAGIC {
        return Err(CodecError::Format("bad magic, expected CVRT".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated("incomplete header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != BINARY_VERSION {
        return Err(CodecError::Format(format!("unsupported version {version}")));
    }
    let n = le_u32(&bytes[6..10]) as usize;
    let m = le_u32(&bytes[10..14]) as usize;
    let nnz = u64::from_le_bytes(bytes[14..22].try_into().expect("8 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    let expected = nnz.checked_mul(RECORD_LEN).ok_or_else(|| CodecError::Format("nnz overflows".into()))?;
    if body.len() < expected {
        return Err(CodecError::Truncated(format!(
            "header promises {nnz} records, body holds {}",
            body.len() / RECORD_LEN
        )));
    }
    if body.len() > expected {
        return Err(CodecError::Format("trailing bytes after last record".into()));
    }
    let mut entries = Vec::with_capacity(nnz);
    for (rec, chunk) in body.chunks_exact(RECORD_LEN).enumerate() {
        let e = Entry {
            i: le_u32(&chunk[0..4]),
            j: le_u32(&chunk[4..8]),
            k: le_u32(&chunk[8..12]),
            value: f64::from_le_bytes(chunk[12..20].try_into().expect("8 bytes")),
        };
        check_entry(&e, n, m, rec + 1)?;
        entries.push(e);
    }
    finish(n, m, entries)
}

pub fn write_tensor(tensor: &CoocTensor, path: &Path, format: TensorFormat) -> Result<(), CodecError> {
    let file = File::create(path).map_err(io_error(path))?;
    let w = BufWriter::new(file);
    match format {
        TensorFormat::Text => write_tensor_text(tensor, w),
        TensorFormat::Binary => write_tensor_binary(tensor, w),
    }
    .map_err(io_error(path))
}

pub fn read_tensor(path: &Path, format: TensorFormat) -> Result<CoocTensor, CodecError> {
    let file = File::open(path).map_err(io_error(path))?;
    let r = BufReader::new(file);
    match format {
        TensorFormat::Text => read_tensor_text(r),
        TensorFormat::Binary => read_tensor_binary(r),
    }
}
