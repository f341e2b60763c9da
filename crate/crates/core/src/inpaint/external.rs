use std::io::{BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};

use super::protocol::{self, Response};
use super::{InpaintBackend, InpaintChunk, Transport};
use crate::error::{Error, Result};
use crate::model::FrameBuffer;

/// A protocol session with an out-of-process inpainter. One request is in
/// flight at a time; open several sessions for parallelism.
pub struct ExternalBackend {
    reader: BufReader<Box<dyn Read + Send>>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
    capacity: usize,
    next_id: u64,
}

impl ExternalBackend {
    pub fn connect(transport: &Transport, capacity: usize) -> Result<Self> {
        match transport {
            Transport::Tcp(addr) => {
                let stream = TcpStream::connect(addr.as_str()).map_err(Error::Transport)?;
                stream.set_nodelay(true).map_err(Error::Transport)?;
                let reader = stream.try_clone().map_err(Error::Transport)?;
                Ok(Self::from_streams(Box::new(reader), Box::new(stream), None, capacity))
            }
            Transport::Command(argv) => {
                let (program, args) = argv
                    .split_first()
                    .ok_or_else(|| Error::InvalidArgument("empty backend command".into()))?;
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(Error::Transport)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Self::from_streams(
                    Box::new(stdout),
                    Box::new(stdin),
                    Some(child),
                    capacity,
                ))
            }
        }
    }

    /// Wraps an already-open byte stream pair.
    pub fn from_streams(
        reader: Box<dyn Read + Send>,
        writer: Box<dyn Write + Send>,
        child: Option<Child>,
        capacity: usize,
    ) -> Self {
        ExternalBackend {
            reader: BufReader::new(reader),
            writer,
            child,
            capacity,
            next_id: 1,
        }
    }
}

impl InpaintBackend for ExternalBackend {
    fn capacity(&self) -> usize {
        self.capacity
    }

    fn inpaint(&mut self, chunk: &InpaintChunk) -> Result<Vec<FrameBuffer>> {
        let id = self.next_id;
        self.next_id += 1;
        protocol::write_request(&mut self.writer, id, chunk)?;
        match protocol::read_response(&mut self.reader)? {
            Response::Result { id: got, frames } => {
                if got != id {
                    return Err(Error::Protocol(format!("response id {got} for request {id}")));
                }
                let first = &chunk.frames()[0];
                if frames.len() != chunk.len() || frames.iter().any(|f| !f.same_shape(first)) {
                    return Err(Error::Protocol(format!(
                        "response shape mismatch: {} frames of {}x{}x{}, expected {} of {}x{}x{}",
                        frames.len(),
                        frames.first().map_or(0, |f| f.width()),
                        frames.first().map_or(0, |f| f.height()),
                        frames.first().map_or(0, |f| f.channels()),
                        chunk.len(),
                        first.width(),
                        first.height(),
                        first.channels()
                    )));
                }
                Ok(frames)
            }
            Response::Error { message, .. } => Err(Error::Backend(message)),
        }
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        if let Some(mut child) = self.child.take() {
            // closing stdin lets a well-behaved server exit on its own
            self.writer = Box::new(std::io::sink());
            if !matches!(child.try_wait(), Ok(Some(_))) {
                let deadline = std::time::Instant::now() + std::time::Duration::from_secs(2);
                while std::time::Instant::now() < deadline {
                    if let Ok(Some(_)) = child.try_wait() {
                        return;
                    }
                    std::thread::sleep(std::time::Duration::from_millis(10));
                }
                let _ = child.kill();
                let _ = child.wait();
            }
        }
    }
}
