//! Ranks as threads of one process, exchanging messages through shared
//! mailboxes.

use std::sync::Arc;
use std::time::Duration;

use super::mailbox::Mailbox;
use super::{Backend, CommConfig, CommError, Communicator, Transport};

pub struct InProcessTransport {
    rank: usize,
    boxes: Arc<Vec<Mailbox>>,
}

impl Transport for InProcessTransport {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.boxes.len()
    }

    fn backend(&self) -> Backend {
        Backend::InProcess
    }

    fn send(&self, dest: usize, tag: u32, payload: &[u8]) -> Result<(), CommError> {
        self.boxes[dest].push(self.rank, tag, payload.to_vec());
        Ok(())
    }

    fn recv(&self, source: usize, tag: u32, timeout: Duration) -> Result<Vec<u8>, CommError> {
        self.boxes[self.rank].pop(source, tag, timeout)
    }
}

impl Drop for InProcessTransport {
    fn drop(&mut self) {
        for (r, mb) in self.boxes.iter().enumerate() {
            if r != self.rank {
                mb.close(self.rank);
            }
        }
    }
}

/// One communicator per rank, all connected.
pub fn comm_init_inprocess(size: usize, config: &CommConfig) -> Result<Vec<Communicator>, CommError> {
    if size == 0 {
        return Err(CommError::InvalidRank(0));
    }
    let boxes = Arc::new((0..size).map(|_| Mailbox::new(size)).collect::<Vec<_>>());
    Ok((0..size)
        .map(|rank| {
            Communicator::new(
                Box::new(InProcessTransport {
                    rank,
                    boxes: Arc::clone(&boxes),
                }),
                config.clone(),
            )
        })
        .collect())
}

/// Runs `f` once per rank on its own thread and returns the per-rank results
/// in rank order. A panicking rank re-raises its panic here.
pub fn launch_inprocess<T, F>(size: usize, config: &CommConfig, f: F) -> Result<Vec<T>, CommError>
where
    T: Send,
    F: Fn(Communicator) -> T + Sync,
{
    let comms = comm_init_inprocess(size, config)?;
    let f = &f;
    let out = std::thread::scope(|s| {
        let handles: Vec<_> = comms
            .into_iter()
            .map(|c| {
                std::thread::Builder::new()
                    .name(format!("rank-{}", c.rank()))
                    .spawn_scoped(s, move || f(c))
                    .expect("spawn rank thread")
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    Ok(out)
}
