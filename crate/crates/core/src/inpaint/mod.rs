//! Hole filling for warped frames.
//!
//! A backend receives an [`InpaintChunk`] (a short run of warped frames and
//! their masks, the first few of which are already final) and returns the
//! completed frames. Two backends run in-process: [`NullBackend`] returns
//! its input and [`PullPushBackend`] fills each frame independently. Any
//! other inpainter (typically a video diffusion model) plugs in through the
//! byte-stream protocol in [`protocol`], served over a subprocess's stdio or
//! a TCP socket.

mod external;
pub mod protocol;
mod pullpush;
pub mod server;

use std::fmt;
use std::str::FromStr;

pub use external::ExternalBackend;
pub use pullpush::{inpaint_pullpush, inpaint_pullpush_with, PullPushOptions};

use crate::error::{Error, Result};
use crate::model::{FrameBuffer, OcclusionMask};

/// Frames one inpainting call may cover by default.
pub const DEFAULT_CAPACITY: usize = 25;

#[derive(Clone, Debug, PartialEq)]
pub struct InpaintChunk {
    frames: Vec<FrameBuffer>,
    masks: Vec<OcclusionMask>,
    context_count: usize,
}

impl InpaintChunk {
    /// The first `context_count` frames are final; their masks must be
    /// clear.
    pub fn new(frames: Vec<FrameBuffer>, masks: Vec<OcclusionMask>, context_count: usize) -> Result<Self> {
        let first = frames.first().ok_or(Error::Empty("inpaint chunk"))?;
        if masks.len() != frames.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} frames but {} masks",
                frames.len(),
                masks.len()
            )));
        }
        if context_count > frames.len() {
            return Err(Error::InvalidArgument(format!(
                "context count {context_count} exceeds {} frames",
                frames.len()
            )));
        }
        for (i, (f, m)) in frames.iter().zip(&masks).enumerate() {
            if !f.same_shape(first) || !m.matches(f) {
                return Err(Error::DimensionMismatch(format!("frame or mask {i} differs in shape")));
            }
        }
        if let Some(i) = masks[..context_count].iter().position(|m| !m.is_clear()) {
            return Err(Error::InvalidArgument(format!("context frame {i} has holes")));
        }
        Ok(InpaintChunk {
            frames,
            masks,
            context_count,
        })
    }

    pub fn frames(&self) -> &[FrameBuffer] {
        &self.frames
    }

    pub fn masks(&self) -> &[OcclusionMask] {
        &self.masks
    }

    pub fn context_count(&self) -> usize {
        self.context_count
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }
}

pub trait InpaintBackend: Send {
    /// Maximum frames per chunk.
    fn capacity(&self) -> usize;

    fn inpaint(&mut self, chunk: &InpaintChunk) -> Result<Vec<FrameBuffer>>;
}

/// Runs one chunk through `backend`, enforcing capacity, the output shape
/// and bit-exact passthrough of the context frames.
pub fn inpaint_chunk(backend: &mut dyn InpaintBackend, chunk: &InpaintChunk) -> Result<Vec<FrameBuffer>> {
    if chunk.len() > backend.capacity() {
        return Err(Error::CapacityExceeded {
            frames: chunk.len(),
            capacity: backend.capacity(),
        });
    }
    let mut out = backend.inpaint(chunk)?;
    if out.len() != chunk.len() {
        return Err(Error::Protocol(format!(
            "backend returned {} frames for a {}-frame chunk",
            out.len(),
            chunk.len()
        )));
    }
    if let Some(i) = out.iter().position(|f| !f.same_shape(&chunk.frames[0])) {
        return Err(Error::Protocol(format!("backend frame {i} has the wrong shape")));
    }
    for (o, i) in out.iter_mut().zip(&chunk.frames).take(chunk.context_count) {
        o.clone_from(i);
    }
    Ok(out)
}

/// Returns frames unchanged.
#[derive(Clone, Copy, Debug)]
pub struct NullBackend {
    pub capacity: usize,
}

impl Default for NullBackend {
    fn default() -> Self {
        NullBackend {
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl InpaintBackend for NullBackend {
    fn capacity(&self) -> usize {
        self.capacity
    }

    fn inpaint(&mut self, chunk: &InpaintChunk) -> Result<Vec<FrameBuffer>> {
        Ok(chunk.frames.clone())
    }
}

/// Per-frame pull-push fill; no temporal model.
#[derive(Clone, Copy, Debug)]
pub struct PullPushBackend {
    pub capacity: usize,
}

impl Default for PullPushBackend {
    fn default() -> Self {
        PullPushBackend {
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl InpaintBackend for PullPushBackend {
    fn capacity(&self) -> usize {
        self.capacity
    }

    fn inpaint(&mut self, chunk: &InpaintChunk) -> Result<Vec<FrameBuffer>> {
        chunk
            .frames
            .iter()
            .zip(&chunk.masks)
            .map(|(f, m)| inpaint_pullpush(f, m))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Null,
    PullPush,
    External,
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null" => Ok(BackendKind::Null),
            "pullpush" => Ok(BackendKind::PullPush),
            "external" => Ok(BackendKind::External),
            other => Err(Error::InvalidArgument(format!(
                "unknown backend '{other}', expected null, pullpush or external"
            ))),
        }
    }
}

/// Where an external backend lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transport {
    /// Program and arguments; the protocol runs over its stdin/stdout.
    Command(Vec<String>),
    /// `host:port`.
    Tcp(String),
}

impl FromStr for Transport {
    type Err = Error;

    /// A single token of the form `host:port` with a numeric port is a TCP
    /// address; anything else is a command line split on whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidArgument("empty external backend target".into()));
        }
        if !s.contains(char::is_whitespace) {
            if let Some((host, port)) = s.rsplit_once(':') {
                if !host.is_empty() && !host.contains('/') && port.parse::<u16>().is_ok() {
                    return Ok(Transport::Tcp(s.to_string()));
                }
            }
        }
        Ok(Transport::Command(s.split_whitespace().map(str::to_string).collect()))
    }
}

impl fmt::Display for Transport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transport::Command(argv) => write!(f, "{}", argv.join(" ")),
            Transport::Tcp(addr) => write!(f, "{addr}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub capacity: usize,
    pub transport: Option<Transport>,
}

impl BackendDescriptor {
    pub fn new(kind: BackendKind, capacity: usize, transport: Option<Transport>) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("backend capacity must be >= 1".into()));
        }
        if kind == BackendKind::External && transport.is_none() {
            return Err(Error::InvalidArgument("external backend needs a transport".into()));
        }
        Ok(BackendDescriptor {
            kind,
            capacity,
            transport,
        })
    }

    /// Opens a session. External backends get a fresh connection (or
    /// subprocess) per call.
    pub fn connect(&self) -> Result<Box<dyn InpaintBackend>> {
        Ok(match self.kind {
            BackendKind::Null => Box::new(NullBackend {
                capacity: self.capacity,
            }),
            BackendKind::PullPush => Box::new(PullPushBackend {
                capacity: self.capacity,
            }),
            BackendKind::External => {
                let transport = self.transport.as_ref().expect("checked in new");
                Box::new(ExternalBackend::connect(transport, self.capacity)?)
            }
        })
    }
}
