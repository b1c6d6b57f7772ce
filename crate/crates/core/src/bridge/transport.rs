//! Line transports: a child process speaking on stdin/stdout, or a TCP stream.
//!
//! Incoming lines are read on a dedicated thread and handed over through a
//! channel, which gives both transports the same timeout behaviour.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    /// Shell command line; requests go to its stdin, responses come from its
    /// stdout, stderr is inherited.
    Subprocess(String),
    Tcp { host: String, port: u16 },
}

impl std::fmt::Display for Transport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Transport::Subprocess(cmd) => write!(f, "cmd:{cmd}"),
            Transport::Tcp { host, port } => write!(f, "tcp:{host}:{port}"),
        }
    }
}

enum Incoming {
    Line(Vec<u8>),
    Closed(String),
}

pub struct Connection {
    writer: Box<dyn Write + Send>,
    incoming: Receiver<Incoming>,
    child: Option<Child>,
    describe: String,
}

fn spawn_reader<R: Read + Send + 'static>(source: R) -> Receiver<Incoming> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let mut reader = BufReader::new(source);
        loop {
            let mut buf = Vec::new();
            match reader.read_until(b'\n', &mut buf) {
                Ok(0) => {
                    let _ = tx.send(Incoming::Closed("peer closed the stream".into()));
                    return;
                }
                Ok(_) if buf.last() != Some(&b'\n') => {
                    let _ = tx.send(Incoming::Closed("stream closed in the middle of a message".into()));
                    return;
                }
                Ok(_) => {
                    if tx.send(Incoming::Line(buf)).is_err() {
                        return;
                    }
                }
                Err(e) => {
                    let _ = tx.send(Incoming::Closed(e.to_string()));
                    return;
                }
            }
        }
    });
    rx
}

impl Connection {
    pub fn open(transport: &Transport) -> Result<Self> {
        let describe = transport.to_string();
        match transport {
            Transport::Subprocess(cmd) => {
                let mut child = Command::new("sh")
                    .arg("-c")
                    .arg(format!("exec {cmd}"))
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| Error::Transport(format!("{describe}: spawn failed: {e}")))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Connection {
                    writer: Box::new(stdin),
                    incoming: spawn_reader(stdout),
                    child: Some(child),
                    describe,
                })
            }
            Transport::Tcp { host, port } => {
                let stream = TcpStream::connect((host.as_str(), *port))
                    .map_err(|e| Error::Transport(format!("{describe}: connect failed: {e}")))?;
                let _ = stream.set_nodelay(true);
                let read_half = stream
                    .try_clone()
                    .map_err(|e| Error::Transport(format!("{describe}: {e}")))?;
                Ok(Connection {
                    writer: Box::new(stream),
                    incoming: spawn_reader(read_half),
                    child: None,
                    describe,
                })
            }
        }
    }

    pub fn send(&mut self, line: &[u8]) -> Result<()> {
        self.writer
            .write_all(line)
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::Transport(format!("{}: write failed: {e}", self.describe)))
    }

    pub fn recv(&mut self, timeout: Duration) -> Result<Vec<u8>> {
        match self.incoming.recv_timeout(timeout) {
            Ok(Incoming::Line(line)) => Ok(line),
            Ok(Incoming::Closed(why)) => Err(Error::Transport(format!("{}: {why}", self.describe))),
            Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(timeout.as_secs_f64())),
            Err(RecvTimeoutError::Disconnected) => {
                Err(Error::Transport(format!("{}: reader stopped", self.describe)))
            }
        }
    }

    pub fn roundtrip(&mut self, line: &[u8], timeout: Duration) -> Result<Vec<u8>> {
        self.send(line)?;
        self.recv(timeout)
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
