//! TCP transport.
//!
//! Wire format, every message: a 16-byte little-endian header
//! `magic: u32 | tag: u32 | source: u32 | length: u32` followed by `length`
//! payload bytes.
//!
//! Rendezvous: rank 0 listens at the configured address. Every other rank
//! opens its own listener, connects to rank 0 and sends a hello frame
//! carrying its rank and listener address. Rank 0 answers with the address
//! table; rank `r` then connects to ranks `1..r` and accepts from `r+1..size`,
//! giving a full mesh before any user traffic flows.

use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};

use super::mailbox::Mailbox;
use super::{Backend, CommConfig, CommError, Communicator, Transport};

pub const FRAME_MAGIC: u32 = u32::from_le_bytes(*b"LFM1");
pub const HEADER_LEN: usize = 16;

const TAG_HELLO: u32 = 0xFFFF_FF00;
const TAG_TABLE: u32 = 0xFFFF_FF01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameHeader {
    pub tag: u32,
    pub source: u32,
    pub length: u32,
}

impl FrameHeader {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&FRAME_MAGIC.to_le_bytes());
        h[4..8].copy_from_slice(&self.tag.to_le_bytes());
        h[8..12].copy_from_slice(&self.source.to_le_bytes());
        h[12..16].copy_from_slice(&self.length.to_le_bytes());
        h
    }

    pub fn decode(h: &[u8; HEADER_LEN]) -> Result<Self, CommError> {
        let word = |i: usize| u32::from_le_bytes(h[i..i + 4].try_into().expect("4 bytes"));
        if word(0) != FRAME_MAGIC {
            return Err(CommError::Protocol(format!("bad frame magic {:#010x}", word(0))));
        }
        Ok(FrameHeader {
            tag: word(4),
            source: word(8),
            length: word(12),
        })
    }
}

/// Header plus payload as one buffer.
pub fn encode_frame(tag: u32, source: u32, payload: &[u8]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + payload.len());
    buf.extend_from_slice(
        &FrameHeader {
            tag,
            source,
            length: payload.len() as u32,
        }
        .encode(),
    );
    buf.extend_from_slice(payload);
    buf
}

/// Reads one frame, enforcing the payload size limit.
pub fn read_frame<R: Read>(r: &mut R, max_len: usize) -> Result<(FrameHeader, Vec<u8>), CommError> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h).map_err(io_err)?;
    let header = FrameHeader::decode(&h)?;
    if header.length as usize > max_len {
        return Err(CommError::MessageTooLarge {
            len: header.length as usize,
            limit: max_len,
        });
    }
    let mut payload = vec![0u8; header.length as usize];
    r.read_exact(&mut payload).map_err(io_err)?;
    Ok((header, payload))
}

fn io_err(e: io::Error) -> CommError {
    CommError::Io(e.to_string())
}

pub struct SocketTransport {
    rank: usize,
    size: usize,
    max_len: usize,
    writers: Vec<Option<Mutex<TcpStream>>>,
    mailbox: Arc<Mailbox>,
}

impl Transport for SocketTransport {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.size
    }

    fn backend(&self) -> Backend {
        Backend::Socket
    }

    fn send(&self, dest: usize, tag: u32, payload: &[u8]) -> Result<(), CommError> {
        if payload.len() > self.max_len {
            return Err(CommError::MessageTooLarge {
                len: payload.len(),
                limit: self.max_len,
            });
        }
        let w = self.writers[dest].as_ref().ok_or(CommError::InvalidRank(dest))?;
        let frame = encode_frame(tag, self.rank as u32, payload);
        let mut s = w.lock().expect("socket writer lock");
        s.write_all(&frame).map_err(|_| CommError::PeerClosed(dest))
    }

    fn recv(&self, source: usize, tag: u32, timeout: Duration) -> Result<Vec<u8>, CommError> {
        self.mailbox.pop(source, tag, timeout)
    }
}

impl Drop for SocketTransport {
    fn drop(&mut self) {
        for s in self.writers.iter().flatten() {
            if let Ok(s) = s.lock() {
                let _ = s.shutdown(Shutdown::Write);
            }
        }
    }
}

fn resolve(addr: &str) -> Result<SocketAddr, CommError> {
    addr.to_socket_addrs()
        .map_err(|e| CommError::Io(format!("cannot resolve {addr}: {e}")))?
        .next()
        .ok_or_else(|| CommError::Io(format!("no address for {addr}")))
}

fn timeout_err(what: impl Into<String>) -> CommError {
    CommError::RendezvousTimeout(what.into())
}

fn connect_until(addr: SocketAddr, deadline: Instant) -> Result<TcpStream, CommError> {
    loop {
        let now = Instant::now();
        if now >= deadline {
            return Err(timeout_err(format!("could not reach {addr}")));
        }
        let budget = (deadline - now).min(Duration::from_millis(500));
        match TcpStream::connect_timeout(&addr, budget) {
            Ok(s) => return Ok(s),
            Err(e) => {
                debug!("connect {addr}: {e}");
                thread::sleep(Duration::from_millis(50).min(deadline.saturating_duration_since(Instant::now())));
            }
        }
    }
}

fn accept_until(listener: &TcpListener, deadline: Instant) -> Result<TcpStream, CommError> {
    listener.set_nonblocking(true).map_err(io_err)?;
    loop {
        match listener.accept() {
            Ok((s, _)) => {
                s.set_nonblocking(false).map_err(io_err)?;
                return Ok(s);
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    return Err(timeout_err("peers did not connect in time"));
                }
                thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(io_err(e)),
        }
    }
}

fn handshake_read(s: &mut TcpStream, deadline: Instant, max_len: usize) -> Result<(FrameHeader, Vec<u8>), CommError> {
    let left = deadline
        .saturating_duration_since(Instant::now())
        .max(Duration::from_millis(1));
    s.set_read_timeout(Some(left)).map_err(io_err)?;
    let r = read_frame(s, max_len).map_err(|e| match e {
        CommError::Io(m) => timeout_err(format!("handshake: {m}")),
        other => other,
    });
    s.set_read_timeout(None).map_err(io_err)?;
    r
}

fn send_frame(s: &mut TcpStream, tag: u32, source: usize, payload: &[u8]) -> Result<(), CommError> {
    s.write_all(&encode_frame(tag, source as u32, payload)).map_err(io_err)
}

fn register(peers: &mut [Option<TcpStream>], rank: usize, claimed: u32, stream: TcpStream) -> Result<usize, CommError> {
    let j = claimed as usize;
    if j >= peers.len() || j == rank {
        return Err(CommError::Protocol(format!("hello from invalid rank {j}")));
    }
    if peers[j].is_some() {
        return Err(CommError::DuplicateRank(j));
    }
    peers[j] = Some(stream);
    Ok(j)
}

/// Joins (or, as rank 0, hosts) the rendezvous and builds the full mesh.
pub fn comm_init_socket(
    rank: usize,
    size: usize,
    rendezvous: &str,
    config: &CommConfig,
) -> Result<Communicator, CommError> {
    if size == 0 || rank >= size {
        return Err(CommError::InvalidRank(rank));
    }
    let max_len = config.max_message_bytes;
    let deadline = Instant::now() + config.rendezvous_timeout;
    let mut peers: Vec<Option<TcpStream>> = (0..size).map(|_| None).collect();

    if size > 1 {
        if rank == 0 {
            let listener = TcpListener::bind(rendezvous)
                .map_err(|e| CommError::Io(format!("cannot listen on {rendezvous}: {e}")))?;
            let mut table = vec![rendezvous.to_string(); size];
            for _ in 1..size {
                let mut s = accept_until(&listener, deadline)?;
                let (h, payload) = handshake_read(&mut s, deadline, max_len)?;
                if h.tag != TAG_HELLO {
                    return Err(CommError::Protocol("expected hello frame".into()));
                }
                let j = register(&mut peers, rank, h.source, s)?;
                table[j] = String::from_utf8_lossy(&payload).into_owned();
            }
            let table = table.join("\n");
            for s in peers.iter_mut().flatten() {
                send_frame(s, TAG_TABLE, 0, table.as_bytes())?;
            }
        } else {
            let root = resolve(rendezvous)?;
            let listener = TcpListener::bind(SocketAddr::new(root.ip(), 0)).map_err(io_err)?;
            let my_addr = listener.local_addr().map_err(io_err)?.to_string();

            let mut s = connect_until(root, deadline)?;
            send_frame(&mut s, TAG_HELLO, rank, my_addr.as_bytes())?;
            let (h, payload) = handshake_read(&mut s, deadline, max_len)?;
            if h.tag != TAG_TABLE {
                return Err(CommError::Protocol("expected address table".into()));
            }
            peers[0] = Some(s);
            let table: Vec<String> = String::from_utf8_lossy(&payload)
                .split('\n')
                .map(str::to_string)
                .collect();
            if table.len() != size {
                return Err(CommError::Protocol(format!(
                    "address table has {} entries for {size} ranks",
                    table.len()
                )));
            }
            for (j, addr) in table.iter().enumerate().take(rank).skip(1) {
                let mut s = connect_until(resolve(addr)?, deadline)?;
                send_frame(&mut s, TAG_HELLO, rank, &[])?;
                peers[j] = Some(s);
            }
            for _ in rank + 1..size {
                let mut s = accept_until(&listener, deadline)?;
                let (h, _) = handshake_read(&mut s, deadline, max_len)?;
                if h.tag != TAG_HELLO {
                    return Err(CommError::Protocol("expected hello frame".into()));
                }
                let j = register(&mut peers, rank, h.source, s)?;
                if j < rank {
                    return Err(CommError::Protocol(format!("unexpected hello from rank {j}")));
                }
            }
        }
    }

    let mailbox = Arc::new(Mailbox::new(size));
    let mut writers = Vec::with_capacity(size);
    for (j, p) in peers.into_iter().enumerate() {
        match p {
            None => writers.push(None),
            Some(stream) => {
                stream.set_nodelay(true).map_err(io_err)?;
                let mut reader = stream.try_clone().map_err(io_err)?;
                let mb = Arc::clone(&mailbox);
                thread::Builder::new()
                    .name(format!("rank{rank}-reader{j}"))
                    .spawn(move || {
                        loop {
                            match read_frame(&mut reader, max_len) {
                                Ok((h, payload)) => {
                                    if h.source as usize != j {
                                        warn!("frame on link {j} claims source {}", h.source);
                                        break;
                                    }
                                    mb.push(j, h.tag, payload);
                                }
                                Err(e) => {
                                    debug!("reader for rank {j} stopping: {e}");
                                    break;
                                }
                            }
                        }
                        mb.close(j);
                    })
                    .map_err(io_err)?;
                writers.push(Some(Mutex::new(stream)));
            }
        }
    }

    Ok(Communicator::new(
        Box::new(SocketTransport {
            rank,
            size,
            max_len,
            writers,
            mailbox,
        }),
        config.clone(),
    ))
}

/// Binds an ephemeral localhost port and releases it, for test rendezvous.
pub fn free_local_addr() -> io::Result<String> {
    let l = TcpListener::bind("127.0.0.1:0")?;
    Ok(l.local_addr()?.to_string())
}

/// All ranks of a socket world as threads of this process. Mostly for tests;
/// real runs put each rank in its own process.
pub fn launch_socket_threads<T, F>(size: usize, config: &CommConfig, f: F) -> Result<Vec<T>, CommError>
where
    T: Send,
    F: Fn(Communicator) -> T + Sync,
{
    let addr = free_local_addr().map_err(io_err)?;
    let f = &f;
    let addr = &addr;
    thread::scope(|s| {
        let handles: Vec<_> = (0..size)
            .map(|rank| {
                s.spawn(move || -> Result<T, CommError> {
                    let comm = comm_init_socket(rank, size, addr, config)?;
                    Ok(f(comm))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    })
}
