use std::fmt;
use std::io::{self, Read, Write};
use std::net::{Ipv4Addr, TcpListener, TcpStream};
use std::str::FromStr;
use std::sync::mpsc::{channel, Receiver, Sender};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    #[default]
    #[serde(alias = "in-mem")]
    Inmem,
    #[serde(alias = "tcp-loopback")]
    Tcp,
}

impl TransportKind {
    pub fn name(self) -> &'static str {
        match self {
            TransportKind::Inmem => "inmem",
            TransportKind::Tcp => "tcp",
        }
    }
}

impl fmt::Display for TransportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inmem" | "in-mem" => Ok(TransportKind::Inmem),
            "tcp" | "tcp-loopback" => Ok(TransportKind::Tcp),
            other => Err(Error::InvalidArgument(format!(
                "unknown transport '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Ping,
    Pong,
}

enum Link {
    Inmem {
        tx: Sender<Vec<u8>>,
        rx: Receiver<Vec<u8>>,
        /// Buffers handed back to the peer after reading, and those the peer handed back.
        give_back: Sender<Vec<u8>>,
        returned: Receiver<Vec<u8>>,
    },
    Tcp {
        stream: TcpStream,
        buf: Vec<u8>,
    },
}

/// One side of a reliable, ordered message stream.
pub struct Endpoint {
    role: Role,
    kind: TransportKind,
    link: Link,
}

impl fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Endpoint")
            .field("role", &self.role)
            .field("kind", &self.kind)
            .finish()
    }
}

fn closed_or(e: io::Error) -> Error {
    use io::ErrorKind::*;
    match e.kind() {
        UnexpectedEof | BrokenPipe | ConnectionReset | ConnectionAborted | NotConnected => {
            Error::PeerClosed
        }
        _ => Error::Io(e),
    }
}

/// A connected (ping, pong) pair.
pub fn make_pair(kind: TransportKind) -> Result<(Endpoint, Endpoint)> {
    match kind {
        TransportKind::Inmem => {
            let (a_tx, b_rx) = channel();
            let (b_tx, a_rx) = channel();
            let (a_back, b_returned) = channel();
            let (b_back, a_returned) = channel();
            let a = Link::Inmem {
                tx: a_tx,
                rx: a_rx,
                give_back: a_back,
                returned: a_returned,
            };
            let b = Link::Inmem {
                tx: b_tx,
                rx: b_rx,
                give_back: b_back,
                returned: b_returned,
            };
            Ok((
                Endpoint::new(Role::Ping, kind, a),
                Endpoint::new(Role::Pong, kind, b),
            ))
        }
        TransportKind::Tcp => {
            let unavailable = |e: io::Error| Error::TransportUnavailable(e.to_string());
            let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, 0)).map_err(unavailable)?;
            let addr = listener.local_addr().map_err(unavailable)?;
            let ping = TcpStream::connect(addr).map_err(unavailable)?;
            let (pong, _) = listener.accept().map_err(unavailable)?;
            for s in [&ping, &pong] {
                s.set_nodelay(true).map_err(unavailable)?;
            }
            let link = |stream| Link::Tcp {
                stream,
                buf: Vec::new(),
            };
            Ok((
                Endpoint::new(Role::Ping, kind, link(ping)),
                Endpoint::new(Role::Pong, kind, link(pong)),
            ))
        }
    }
}

impl Endpoint {
    fn new(role: Role, kind: TransportKind, link: Link) -> Self {
        Endpoint { role, kind, link }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn kind(&self) -> TransportKind {
        self.kind
    }

    /// Send one `len`-byte message whose payload is written in place by `fill`.
    pub fn send_with(
        &mut self,
        len: usize,
        fill: impl FnOnce(&mut [u8]) -> Result<()>,
    ) -> Result<()> {
        match &mut self.link {
            Link::Inmem { tx, returned, .. } => {
                let mut buf = returned.try_recv().unwrap_or_default();
                buf.resize(len, 0);
                fill(&mut buf[..len])?;
                tx.send(buf).map_err(|_| Error::PeerClosed)
            }
            Link::Tcp { stream, buf } => {
                // Header and payload leave in a single write.
                buf.resize(8 + len, 0);
                buf[..8].copy_from_slice(&(len as u64).to_le_bytes());
                fill(&mut buf[8..])?;
                stream.write_all(buf).map_err(closed_or)
            }
        }
    }

    pub fn send(&mut self, payload: &[u8]) -> Result<()> {
        self.send_with(payload.len(), |frame| {
            frame.copy_from_slice(payload);
            Ok(())
        })
    }

    /// Receive one message and hand its payload to `read`.
    pub fn recv_with<R>(&mut self, read: impl FnOnce(&[u8]) -> Result<R>) -> Result<R> {
        match &mut self.link {
            Link::Inmem { rx, give_back, .. } => {
                let buf = rx.recv().map_err(|_| Error::PeerClosed)?;
                let out = read(&buf);
                // The peer may already be gone; the buffer is then simply dropped.
                let _ = give_back.send(buf);
                out
            }
            Link::Tcp { stream, buf } => {
                let mut header = [0u8; 8];
                stream.read_exact(&mut header).map_err(closed_or)?;
                let len = usize::try_from(u64::from_le_bytes(header))
                    .map_err(|_| Error::Protocol("frame length exceeds address space".into()))?;
                buf.resize(len, 0);
                stream.read_exact(buf).map_err(closed_or)?;
                read(buf)
            }
        }
    }

    pub fn recv(&mut self) -> Result<Vec<u8>> {
        self.recv_with(|p| Ok(p.to_vec()))
    }
}
