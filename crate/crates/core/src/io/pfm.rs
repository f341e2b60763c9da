//! Single-channel Portable Float Map (`Pf`) reading and writing.
//!
//! Header: `Pf\n<width> <height>\n<scale>\n`, where a negative scale means
//! little-endian samples. Rows are stored bottom to top.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::DisparityMap;

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<DisparityMap> {
    let bad = |m: &str| Error::format(path, m);
    // three whitespace-terminated header tokens after the magic
    let mut pos = 0;
    let mut token = || -> Result<&[u8]> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos || pos >= bytes.len() {
            return Err(bad("truncated header"));
        }
        Ok(&bytes[start..pos])
    };
    match token()? {
        b"Pf" => {}
        b"PF" => return Err(bad("expected single-channel PFM (Pf), found PF")),
        _ => return Err(bad("bad magic, expected Pf")),
    }
    let mut number = |what: &str| -> Result<String> {
        let t = token()?;
        std::str::from_utf8(t)
            .map(str::to_string)
            .map_err(|_| bad(&format!("non-ASCII {what}")))
    };
    let width: usize = number("width")?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = number("height")?.parse().map_err(|_| bad("bad height"))?;
    let scale: f32 = number("scale")?.parse().map_err(|_| bad("bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be a non-zero number"));
    }
    // exactly one whitespace byte separates the header from the data
    let data = &bytes[pos + 1..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if width == 0 || height == 0 {
        return Err(bad("dimensions must be positive"));
    }
    if data.len() < expected {
        return Err(bad(&format!("truncated payload: {} of {expected} bytes", data.len())));
    }
    if data.len() > expected {
        return Err(bad(&format!(
            "dimension mismatch: {} trailing bytes",
            data.len() - expected
        )));
    }
    let little = scale < 0.0;
    let mut values = vec![0.0f32; width * height];
    for (file_row, chunk) in data.chunks_exact(width * 4).enumerate() {
        let y = height - 1 - file_row;
        for (x, b) in chunk.chunks_exact(4).enumerate() {
            let b: [u8; 4] = b.try_into().unwrap();
            values[y * width + x] = if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
        }
    }
    DisparityMap::new(width, height, values).map_err(|e| bad(&e.to_string()))
}

/// Encodes little-endian (scale `-1`).
pub fn encode_pfm(map: &DisparityMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for v in map.row(y) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    decode_pfm(&bytes, path)
}

pub fn write_pfm(map: &DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pfm(map)).map_err(|e| Error::io(path, e))
}
