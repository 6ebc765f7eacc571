//! Minimal reader/writer for the numpy `.npy` binary array format.
//!
//! Covers the subset this toolkit exchanges: little-endian `f4`/`f8` and
//! `i4`/`i8` arrays in C order. Files are written as format version 1.0
//! with `f8` (or `i8` for label vectors) payloads, so a load/save/load
//! cycle of any `f64` array is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, ShapeError};

const MAGIC: &[u8; 6] = b"\x93NUMPY";

/// An n-dimensional array decoded to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

fn io_err(path: &Path, source: std::io::Error) -> ShapeError {
    ShapeError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> ShapeError {
    ShapeError::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn read_npy(path: &Path) -> Result<NpyArray> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| io_err(path, e))?;
    read_npy_bytes(&bytes).map_err(|msg| parse_err(path, msg))
}

/// Decodes an `.npy` byte buffer. Errors are plain messages so callers can
/// attach path context.
pub fn read_npy_bytes(bytes: &[u8]) -> std::result::Result<NpyArray, String> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err("malformed header: missing \\x93NUMPY magic".into());
    }
    let (major, minor) = (bytes[6], bytes[7]);
    let (header_len, header_start) = match major {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 => {
            if bytes.len() < 12 {
                return Err("malformed header: truncated length field".into());
            }
            (
                u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
                12,
            )
        }
        _ => return Err(format!("unsupported npy version {major}.{minor}")),
    };
    let header_end = header_start + header_len;
    if bytes.len() < header_end {
        return Err("malformed header: truncated dict".into());
    }
    let header = std::str::from_utf8(&bytes[header_start..header_end])
        .map_err(|_| "malformed header: dict is not utf-8".to_string())?;

    let descr = extract_quoted(header, "descr").ok_or("malformed header: missing descr")?;
    let fortran = extract_bool(header, "fortran_order")
        .ok_or("malformed header: missing fortran_order")?;
    let shape = extract_shape(header).ok_or("malformed header: missing shape")?;
    if fortran {
        return Err("Fortran-order arrays are not supported; save in C order".into());
    }

    let count: usize = shape.iter().product();
    let payload = &bytes[header_end..];
    let data = decode_payload(&descr, payload, count)?;
    Ok(NpyArray { shape, data })
}

fn decode_payload(descr: &str, payload: &[u8], count: usize) -> std::result::Result<Vec<f64>, String> {
    let width = match descr {
        "<f8" | "<i8" => 8,
        "<f4" | "<i4" => 4,
        other => {
            return Err(format!(
                "unsupported dtype {other:?}; expected little-endian <f4, <f8, <i4 or <i8"
            ))
        }
    };
    if payload.len() < count * width {
        return Err(format!(
            "payload holds {} bytes but shape needs {}",
            payload.len(),
            count * width
        ));
    }
    let mut data = Vec::with_capacity(count);
    match descr {
        "<f8" => {
            for chunk in payload[..count * 8].chunks_exact(8) {
                data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
            }
        }
        "<f4" => {
            for chunk in payload[..count * 4].chunks_exact(4) {
                data.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
            }
        }
        "<i8" => {
            for chunk in payload[..count * 8].chunks_exact(8) {
                data.push(i64::from_le_bytes(chunk.try_into().unwrap()) as f64);
            }
        }
        "<i4" => {
            for chunk in payload[..count * 4].chunks_exact(4) {
                data.push(i32::from_le_bytes(chunk.try_into().unwrap()) as f64);
            }
        }
        _ => unreachable!(),
    }
    Ok(data)
}

fn extract_quoted(header: &str, key: &str) -> Option<String> {
    let idx = header.find(&format!("'{key}'"))?;
    let rest = &header[idx + key.len() + 2..];
    let colon = rest.find(':')?;
    let rest = rest[colon + 1..].trim_start();
    let quote = rest.chars().next()?;
    if quote != '\'' && quote != '"' {
        return None;
    }
    let end = rest[1..].find(quote)?;
    Some(rest[1..1 + end].to_string())
}

fn extract_bool(header: &str, key: &str) -> Option<bool> {
    let idx = header.find(&format!("'{key}'"))?;
    let rest = &header[idx + key.len() + 2..];
    let colon = rest.find(':')?;
    let rest = rest[colon + 1..].trim_start();
    if rest.starts_with("True") {
        Some(true)
    } else if rest.starts_with("False") {
        Some(false)
    } else {
        None
    }
}

fn extract_shape(header: &str) -> Option<Vec<usize>> {
    let idx = header.find("'shape'")?;
    let rest = &header[idx + 7..];
    let open = rest.find('(')?;
    let close = rest[open..].find(')')? + open;
    let inner = &rest[open + 1..close];
    let mut dims = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        dims.push(part.parse::<usize>().ok()?);
    }
    Some(dims)
}

fn header_bytes(descr: &str, shape: &[usize]) -> Vec<u8> {
    let shape_str = match shape.len() {
        1 => format!("({},)", shape[0]),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let mut dict = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape_str}, }}");
    // Pad so the full header (magic + version + len + dict + newline) is a
    // multiple of 64 bytes, as numpy does.
    let unpadded = 10 + dict.len() + 1;
    let padding = (64 - unpadded % 64) % 64;
    dict.push_str(&" ".repeat(padding));
    dict.push('\n');

    let mut out = Vec::with_capacity(10 + dict.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1u8, 0u8]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

pub fn write_npy_f64(path: &Path, shape: &[usize], data: &[f64]) -> Result<()> {
    assert_eq!(shape.iter().product::<usize>(), data.len());
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&header_bytes("<f8", shape))
        .map_err(|e| io_err(path, e))?;
    for v in data {
        w.write_all(&v.to_le_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_npy_i64(path: &Path, data: &[i64]) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&header_bytes("<i8", &[data.len()]))
        .map_err(|e| io_err(path, e))?;
    for v in data {
        w.write_all(&v.to_le_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
