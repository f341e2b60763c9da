//! Wire protocol v1 between the scheduler and an external inpainter.
//!
//! Every message starts with one UTF-8 JSON header line terminated by `\n`.
//!
//! ```text
//! request  {"v":1,"type":"inpaint","id":7,"frames":F,"height":H,"width":W,"channels":C,"context":n}
//!          F*H*W*C float32 LE frame payload, then F*H*W mask bytes (0 or 1)
//! response {"v":1,"type":"result","id":7,"frames":F,"height":H,"width":W,"channels":C}
//!          F*H*W*C float32 LE frame payload
//!       or {"v":1,"type":"error","id":7,"message":"..."}
//! ```
//!
//! Frame payloads are planar and frame-major: for each frame, for each
//! channel, `H` rows of `W` values.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::InpaintChunk;
use crate::error::{Error, Result};
use crate::model::{FrameBuffer, OcclusionMask};

pub const PROTOCOL_VERSION: u64 = 1;

/// Longest accepted header line, newline included.
pub const MAX_HEADER_BYTES: usize = 64 * 1024;

#[derive(Debug, Serialize, Deserialize)]
struct RequestHeader {
    v: u64,
    #[serde(rename = "type")]
    kind: String,
    id: u64,
    frames: usize,
    height: usize,
    width: usize,
    channels: usize,
    context: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultHeader {
    v: u64,
    #[serde(rename = "type")]
    kind: String,
    id: u64,
    frames: usize,
    height: usize,
    width: usize,
    channels: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ErrorHeader {
    v: u64,
    #[serde(rename = "type")]
    kind: String,
    id: u64,
    message: String,
}

/// Byte counts of a request's frame and mask payloads.
pub fn request_payload_len(frames: usize, height: usize, width: usize, channels: usize) -> (usize, usize) {
    (frames * height * width * channels * 4, frames * height * width)
}

fn push_planar(out: &mut Vec<u8>, frame: &FrameBuffer) {
    let c = frame.channels();
    for ch in 0..c {
        for px in frame.data().chunks_exact(c) {
            out.extend_from_slice(&px[ch].to_le_bytes());
        }
    }
}

fn frames_from_planar(
    bytes: &[u8],
    frames: usize,
    height: usize,
    width: usize,
    channels: usize,
) -> Result<Vec<FrameBuffer>> {
    let plane = height * width;
    let per_frame = plane * channels * 4;
    (0..frames)
        .map(|f| {
            let src = &bytes[f * per_frame..(f + 1) * per_frame];
            let mut data = vec![0.0f32; plane * channels];
            for ch in 0..channels {
                for p in 0..plane {
                    let at = (ch * plane + p) * 4;
                    data[p * channels + ch] = f32::from_le_bytes(src[at..at + 4].try_into().unwrap());
                }
            }
            FrameBuffer::new(width, height, channels, data)
                .map_err(|e| Error::Protocol(format!("frame {f} payload: {e}")))
        })
        .collect()
}

fn header_line<T: Serialize>(header: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec(header).expect("header serializes");
    out.push(b'\n');
    out
}

pub fn encode_request(id: u64, chunk: &InpaintChunk) -> Vec<u8> {
    let (f, h, w, c) = (chunk.len(), chunk.height(), chunk.width(), chunk.channels());
    let mut out = header_line(&RequestHeader {
        v: PROTOCOL_VERSION,
        kind: "inpaint".into(),
        id,
        frames: f,
        height: h,
        width: w,
        channels: c,
        context: chunk.context_count(),
    });
    let (frame_bytes, mask_bytes) = request_payload_len(f, h, w, c);
    out.reserve(frame_bytes + mask_bytes);
    for frame in chunk.frames() {
        push_planar(&mut out, frame);
    }
    for mask in chunk.masks() {
        out.extend(mask.values().iter().map(|&hole| u8::from(hole)));
    }
    out
}

pub fn encode_result(id: u64, frames: &[FrameBuffer]) -> Result<Vec<u8>> {
    let first = frames.first().ok_or(Error::Empty("result frames"))?;
    if frames.iter().any(|f| !f.same_shape(first)) {
        return Err(Error::DimensionMismatch("result frames differ in shape".into()));
    }
    let mut out = header_line(&ResultHeader {
        v: PROTOCOL_VERSION,
        kind: "result".into(),
        id,
        frames: frames.len(),
        height: first.height(),
        width: first.width(),
        channels: first.channels(),
    });
    for frame in frames {
        push_planar(&mut out, frame);
    }
    Ok(out)
}

pub fn encode_error(id: u64, message: &str) -> Vec<u8> {
    header_line(&ErrorHeader {
        v: PROTOCOL_VERSION,
        kind: "error".into(),
        id,
        message: message.to_string(),
    })
}

/// Reads one `\n`-terminated line. `Ok(None)` on a clean end of stream.
fn read_header_line(r: &mut impl BufRead) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let n = r
        .take(MAX_HEADER_BYTES as u64)
        .read_until(b'\n', &mut line)
        .map_err(Error::Transport)?;
    if n == 0 {
        return Ok(None);
    }
    if line.last() != Some(&b'\n') {
        return Err(Error::Protocol(if n >= MAX_HEADER_BYTES {
            "header line too long".into()
        } else {
            "truncated header line".into()
        }));
    }
    line.pop();
    Ok(Some(line))
}

/// Parses a header, checking the version and returning the `type` tag and
/// the raw object. The id is reported even when later checks fail.
fn parse_header(line: &[u8]) -> std::result::Result<(String, u64, Value), (u64, String)> {
    let value: Value = serde_json::from_slice(line).map_err(|e| (0, format!("malformed header: {e}")))?;
    let id = value.get("id").and_then(Value::as_u64).unwrap_or(0);
    let Some(obj) = value.as_object() else {
        return Err((id, "malformed header: not a JSON object".into()));
    };
    match obj.get("v").and_then(Value::as_u64) {
        Some(PROTOCOL_VERSION) => {}
        Some(other) => {
            return Err((
                id,
                format!("protocol version mismatch: got {other}, expected {PROTOCOL_VERSION}"),
            ))
        }
        None => return Err((id, "malformed header: missing version".into())),
    }
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or((id, "malformed header: missing type".to_string()))?
        .to_string();
    Ok((kind, id, value))
}

fn read_exact(r: &mut impl Read, len: usize, what: &str) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Protocol(format!(
                "payload length mismatch: {what} truncated (expected {len} bytes)"
            ))
        } else {
            Error::Transport(e)
        }
    })?;
    Ok(buf)
}

fn check_shape(frames: usize, height: usize, width: usize, channels: usize) -> std::result::Result<(), String> {
    if frames == 0 || height == 0 || width == 0 {
        return Err("frames, height and width must be positive".into());
    }
    if channels != 1 && channels != 3 {
        return Err(format!("channels must be 1 or 3, got {channels}"));
    }
    frames
        .checked_mul(height)
        .and_then(|n| n.checked_mul(width))
        .and_then(|n| n.checked_mul(channels))
        .and_then(|n| n.checked_mul(4))
        .filter(|&n| n <= 1 << 34)
        .map(|_| ())
        .ok_or_else(|| "payload too large".to_string())
}

/// What a server reads off the stream.
#[derive(Debug)]
pub enum Incoming {
    Request {
        id: u64,
        chunk: InpaintChunk,
    },
    /// Bad header or invalid request contents. The stream stays usable.
    Rejected {
        id: u64,
        message: String,
    },
    End,
}

/// Reads the next request. I/O failures and truncated payloads are `Err`
/// since the stream position is lost; everything else is `Rejected`.
pub fn read_request(r: &mut impl BufRead) -> Result<Incoming> {
    let Some(line) = read_header_line(r)? else {
        return Ok(Incoming::End);
    };
    let (kind, id, value) = match parse_header(&line) {
        Ok(parsed) => parsed,
        Err((id, message)) => return Ok(Incoming::Rejected { id, message }),
    };
    if kind != "inpaint" {
        return Ok(Incoming::Rejected {
            id,
            message: format!("unexpected message type '{kind}'"),
        });
    }
    let header: RequestHeader = match serde_json::from_value(value) {
        Ok(h) => h,
        Err(e) => {
            return Ok(Incoming::Rejected {
                id,
                message: format!("malformed header: {e}"),
            })
        }
    };
    if let Err(message) = check_shape(header.frames, header.height, header.width, header.channels) {
        return Ok(Incoming::Rejected { id, message });
    }
    let (f, h, w, c) = (header.frames, header.height, header.width, header.channels);
    let (frame_bytes, mask_bytes) = request_payload_len(f, h, w, c);
    let payload = read_exact(r, frame_bytes, "frame payload")?;
    let mask_payload = read_exact(r, mask_bytes, "mask payload")?;

    let decoded = (|| -> Result<InpaintChunk> {
        let frames = frames_from_planar(&payload, f, h, w, c)?;
        let masks = mask_payload
            .chunks_exact(h * w)
            .map(|m| {
                let values = m
                    .iter()
                    .map(|&b| match b {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::Protocol(format!("mask byte {other} is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                OcclusionMask::new(w, h, values)
            })
            .collect::<Result<Vec<_>>>()?;
        InpaintChunk::new(frames, masks, header.context)
    })();
    Ok(match decoded {
        Ok(chunk) => Incoming::Request { id, chunk },
        Err(e) => Incoming::Rejected {
            id,
            message: e.to_string(),
        },
    })
}

#[derive(Debug)]
pub enum Response {
    Result { id: u64, frames: Vec<FrameBuffer> },
    Error { id: u64, message: String },
}

pub fn read_response(r: &mut impl BufRead) -> Result<Response> {
    let line = read_header_line(r)?.ok_or_else(|| Error::Protocol("stream closed before response".into()))?;
    let (kind, id, value) = parse_header(&line).map_err(|(_, m)| Error::Protocol(m))?;
    match kind.as_str() {
        "error" => {
            let header: ErrorHeader =
                serde_json::from_value(value).map_err(|e| Error::Protocol(format!("malformed header: {e}")))?;
            Ok(Response::Error {
                id,
                message: header.message,
            })
        }
        "result" => {
            let header: ResultHeader =
                serde_json::from_value(value).map_err(|e| Error::Protocol(format!("malformed header: {e}")))?;
            let (f, h, w, c) = (header.frames, header.height, header.width, header.channels);
            check_shape(f, h, w, c).map_err(Error::Protocol)?;
            let (frame_bytes, _) = request_payload_len(f, h, w, c);
            let payload = read_exact(r, frame_bytes, "frame payload")?;
            Ok(Response::Result {
                id,
                frames: frames_from_planar(&payload, f, h, w, c)?,
            })
        }
        other => Err(Error::Protocol(format!("unexpected message type '{other}'"))),
    }
}

/// Decodes a complete response held in memory. Error responses become
/// [`Error::Backend`]; trailing bytes are a length mismatch.
pub fn decode_response(bytes: &[u8]) -> Result<Vec<FrameBuffer>> {
    let mut cursor = bytes;
    let response = read_response(&mut cursor)?;
    if !cursor.is_empty() {
        return Err(Error::Protocol(format!(
            "payload length mismatch: {} trailing bytes",
            cursor.len()
        )));
    }
    match response {
        Response::Result { frames, .. } => Ok(frames),
        Response::Error { message, .. } => Err(Error::Backend(message)),
    }
}

/// Decodes a complete request held in memory.
pub fn decode_request(bytes: &[u8]) -> Result<(u64, InpaintChunk)> {
    let mut cursor = bytes;
    let incoming = read_request(&mut cursor)?;
    if !cursor.is_empty() {
        return Err(Error::Protocol(format!(
            "payload length mismatch: {} trailing bytes",
            cursor.len()
        )));
    }
    match incoming {
        Incoming::Request { id, chunk } => Ok((id, chunk)),
        Incoming::Rejected { message, .. } => Err(Error::Protocol(message)),
        Incoming::End => Err(Error::Protocol("empty request".into())),
    }
}

/// Writes a request and flushes.
pub fn write_request(w: &mut impl Write, id: u64, chunk: &InpaintChunk) -> Result<()> {
    w.write_all(&encode_request(id, chunk)).map_err(Error::Transport)?;
    w.flush().map_err(Error::Transport)
}
