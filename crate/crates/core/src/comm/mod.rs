//! Minimal message passing: blocking point-to-point messages, a handful of
//! fixed-order collectives, and the gauge-field halo exchange.
//!
//! Two interchangeable backends sit behind [`Transport`]: ranks as threads
//! of one process ([`inprocess`]) and ranks as processes joined over TCP
//! ([`socket`]). Programs produce bit-identical results on either.

mod halo;
pub mod inprocess;
mod mailbox;
pub mod socket;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use halo::{gather_global_links, global_checksum, halo_exchange, halo_exchange_filtered};
pub use inprocess::{comm_init_inprocess, launch_inprocess};
pub use socket::{comm_init_socket, launch_socket_threads};

/// Tags at or above this value are reserved for collectives and halos.
pub const RESERVED_TAG_BASE: u32 = 0xFFF0_0000;
const TAG_REDUCE: u32 = RESERVED_TAG_BASE;
const TAG_BCAST: u32 = RESERVED_TAG_BASE + 1;
const TAG_BARRIER_IN: u32 = RESERVED_TAG_BASE + 2;
const TAG_BARRIER_OUT: u32 = RESERVED_TAG_BASE + 3;
const TAG_GATHER: u32 = RESERVED_TAG_BASE + 4;
pub(crate) const TAG_HALO: u32 = RESERVED_TAG_BASE + 0x100;

pub const DEFAULT_MAX_MESSAGE_BYTES: usize = 64 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommError {
    #[error("rendezvous timeout: {0}")]
    RendezvousTimeout(String),
    #[error("rank {0} announced twice during rendezvous")]
    DuplicateRank(usize),
    #[error("peer rank {0} closed the connection")]
    PeerClosed(usize),
    #[error("timed out waiting for a message from rank {peer} with tag {tag:#x}")]
    Timeout { peer: usize, tag: u32 },
    #[error("invalid peer rank {0}")]
    InvalidRank(usize),
    #[error("message of {len} bytes exceeds the {limit}-byte limit")]
    MessageTooLarge { len: usize, limit: usize },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[serde(alias = "in-process")]
    InProcess,
    Socket,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::InProcess => "inprocess",
            Backend::Socket => "socket",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CommConfig {
    pub recv_timeout: Duration,
    pub rendezvous_timeout: Duration,
    pub max_message_bytes: usize,
}

impl Default for CommConfig {
    fn default() -> Self {
        CommConfig {
            recv_timeout: Duration::from_secs(300),
            rendezvous_timeout: Duration::from_secs(30),
            max_message_bytes: DEFAULT_MAX_MESSAGE_BYTES,
        }
    }
}

/// Byte-level delivery between ranks. Sends are eager: they return once the
/// payload is handed to the destination's queue or socket.
pub trait Transport: Send {
    fn rank(&self) -> usize;
    fn size(&self) -> usize;
    fn backend(&self) -> Backend;
    fn send(&self, dest: usize, tag: u32, payload: &[u8]) -> Result<(), CommError>;
    fn recv(&self, source: usize, tag: u32, timeout: Duration) -> Result<Vec<u8>, CommError>;
}

/// One rank's handle on the message-passing world.
pub struct Communicator {
    transport: Box<dyn Transport>,
    config: CommConfig,
}

impl std::fmt::Debug for Communicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Communicator")
            .field("rank", &self.rank())
            .field("size", &self.size())
            .field("backend", &self.backend())
            .finish()
    }
}

impl Communicator {
    pub fn new(transport: Box<dyn Transport>, config: CommConfig) -> Self {
        Communicator { transport, config }
    }

    /// Single-rank world, no threads involved.
    pub fn solo() -> Self {
        comm_init_inprocess(1, &CommConfig::default())
            .expect("size 1")
            .pop()
            .expect("one communicator")
    }

    pub fn rank(&self) -> usize {
        self.transport.rank()
    }

    pub fn size(&self) -> usize {
        self.transport.size()
    }

    pub fn backend(&self) -> Backend {
        self.transport.backend()
    }

    pub fn config(&self) -> &CommConfig {
        &self.config
    }

    fn check_peer(&self, peer: usize) -> Result<(), CommError> {
        if peer >= self.size() || peer == self.rank() {
            Err(CommError::InvalidRank(peer))
        } else {
            Ok(())
        }
    }

    pub fn send(&self, dest: usize, tag: u32, payload: &[u8]) -> Result<(), CommError> {
        self.check_peer(dest)?;
        if payload.len() > self.config.max_message_bytes {
            return Err(CommError::MessageTooLarge {
                len: payload.len(),
                limit: self.config.max_message_bytes,
            });
        }
        self.transport.send(dest, tag, payload)
    }

    /// Blocks until the next message on `(source, tag)` arrives.
    pub fn recv(&self, source: usize, tag: u32) -> Result<Vec<u8>, CommError> {
        self.check_peer(source)?;
        self.transport.recv(source, tag, self.config.recv_timeout)
    }

    /// Rank 0 collects every rank's payload, in rank order.
    pub fn gather(&self, payload: Vec<u8>) -> Result<Option<Vec<Vec<u8>>>, CommError> {
        if self.rank() == 0 {
            let mut all = Vec::with_capacity(self.size());
            all.push(payload);
            for r in 1..self.size() {
                all.push(self.recv(r, TAG_GATHER)?);
            }
            Ok(Some(all))
        } else {
            self.send(0, TAG_GATHER, &payload)?;
            Ok(None)
        }
    }

    /// Rank 0's payload delivered to every rank. Non-root ranks pass anything.
    pub fn broadcast(&self, payload: Vec<u8>) -> Result<Vec<u8>, CommError> {
        if self.rank() == 0 {
            for r in 1..self.size() {
                self.send(r, TAG_BCAST, &payload)?;
            }
            Ok(payload)
        } else {
            self.recv(0, TAG_BCAST)
        }
    }

    fn allreduce_with(&self, value: f64, op: impl Fn(f64, f64) -> f64) -> Result<f64, CommError> {
        let result = if self.rank() == 0 {
            let mut acc = value;
            for r in 1..self.size() {
                acc = op(acc, decode_f64(&self.recv(r, TAG_REDUCE)?)?);
            }
            acc
        } else {
            self.send(0, TAG_REDUCE, &value.to_le_bytes())?;
            0.0
        };
        decode_f64(&self.broadcast(result.to_le_bytes().to_vec())?)
    }

    /// Sum over ranks, accumulated left to right in rank order on rank 0 and
    /// broadcast, so every rank sees the same bits.
    pub fn allreduce_sum(&self, value: f64) -> Result<f64, CommError> {
        self.allreduce_with(value, |a, b| a + b)
    }

    pub fn allreduce_max(&self, value: f64) -> Result<f64, CommError> {
        self.allreduce_with(value, f64::max)
    }

    /// No rank returns before every rank has entered.
    pub fn barrier(&self) -> Result<(), CommError> {
        if self.size() == 1 {
            return Ok(());
        }
        if self.rank() == 0 {
            for r in 1..self.size() {
                self.recv(r, TAG_BARRIER_IN)?;
            }
            for r in 1..self.size() {
                self.send(r, TAG_BARRIER_OUT, &[])?;
            }
        } else {
            self.send(0, TAG_BARRIER_IN, &[])?;
            self.recv(0, TAG_BARRIER_OUT)?;
        }
        Ok(())
    }
}

fn decode_f64(b: &[u8]) -> Result<f64, CommError> {
    let arr: [u8; 8] = b
        .try_into()
        .map_err(|_| CommError::Protocol(format!("expected 8-byte value, got {}", b.len())))?;
    Ok(f64::from_le_bytes(arr))
}
