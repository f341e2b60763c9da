//! Reference protocol server, used by the mock backend subcommand and the
//! transport tests.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::str::FromStr;

use super::protocol::{self, Incoming};
use super::{inpaint_chunk, InpaintBackend, NullBackend, PullPushBackend};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServeMode {
    /// Return the input frames.
    Echo,
    /// Fill holes with per-frame pull-push.
    PullPush,
}

impl FromStr for ServeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "echo" => Ok(ServeMode::Echo),
            "pullpush" => Ok(ServeMode::PullPush),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}', expected echo or pullpush"
            ))),
        }
    }
}

fn backend(mode: ServeMode) -> Box<dyn InpaintBackend> {
    match mode {
        ServeMode::Echo => Box::new(NullBackend { capacity: usize::MAX }),
        ServeMode::PullPush => Box::new(PullPushBackend { capacity: usize::MAX }),
    }
}

/// Serves requests until the peer closes the stream. Malformed requests get
/// an error response and the session continues; a truncated payload ends
/// the session since the stream can no longer be re-synchronised.
pub fn serve_stream(reader: impl BufRead, mut writer: impl Write, mode: ServeMode) -> Result<()> {
    let mut reader = reader;
    let mut backend = backend(mode);
    loop {
        let reply = match protocol::read_request(&mut reader) {
            Ok(Incoming::End) => return Ok(()),
            Ok(Incoming::Rejected { id, message }) => protocol::encode_error(id, &message),
            Ok(Incoming::Request { id, chunk }) => {
                match inpaint_chunk(backend.as_mut(), &chunk).and_then(|frames| protocol::encode_result(id, &frames)) {
                    Ok(bytes) => bytes,
                    Err(e) => protocol::encode_error(id, &e.to_string()),
                }
            }
            Err(Error::Transport(e)) => return Err(Error::Transport(e)),
            Err(e) => {
                // best effort: tell the client why before hanging up
                let _ = writer.write_all(&protocol::encode_error(0, &e.to_string()));
                let _ = writer.flush();
                return Err(e);
            }
        };
        writer.write_all(&reply).map_err(Error::Transport)?;
        writer.flush().map_err(Error::Transport)?;
    }
}

/// Serves the protocol on this process's stdin/stdout.
pub fn serve_stdio(mode: ServeMode) -> Result<()> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve_stream(BufReader::new(stdin.lock()), BufWriter::new(stdout.lock()), mode)
}

fn serve_connection(stream: TcpStream, mode: ServeMode) -> Result<()> {
    stream.set_nodelay(true).map_err(Error::Transport)?;
    let reader = BufReader::new(stream.try_clone().map_err(Error::Transport)?);
    serve_stream(reader, BufWriter::new(stream), mode)
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(listener: TcpListener, mode: ServeMode) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream.map_err(Error::Transport)?;
        std::thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = serve_connection(stream, mode) {
                eprintln!("[backend] connection {peer}: {e}");
            }
        });
    }
    Ok(())
}
