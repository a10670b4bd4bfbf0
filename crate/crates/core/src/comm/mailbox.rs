use std::collections::{HashMap, VecDeque};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use super::CommError;

/// Per-rank receive queues keyed by `(source, tag)`.
///
/// Both transports deliver into a mailbox, so sends never wait for the
/// matching receive to be posted.
pub(crate) struct Mailbox {
    state: Mutex<State>,
    cv: Condvar,
}

struct State {
    queues: HashMap<(usize, u32), VecDeque<Vec<u8>>>,
    closed: Vec<bool>,
}

impl Mailbox {
    pub(crate) fn new(size: usize) -> Self {
        Mailbox {
            state: Mutex::new(State {
                queues: HashMap::new(),
                closed: vec![false; size],
            }),
            cv: Condvar::new(),
        }
    }

    pub(crate) fn push(&self, source: usize, tag: u32, payload: Vec<u8>) {
        let mut st = self.state.lock().expect("mailbox lock");
        st.queues.entry((source, tag)).or_default().push_back(payload);
        self.cv.notify_all();
    }

    /// Marks `source` as gone; pending messages stay receivable.
    pub(crate) fn close(&self, source: usize) {
        let mut st = self.state.lock().expect("mailbox lock");
        if let Some(c) = st.closed.get_mut(source) {
            *c = true;
        }
        self.cv.notify_all();
    }

    pub(crate) fn pop(&self, source: usize, tag: u32, timeout: Duration) -> Result<Vec<u8>, CommError> {
        let deadline = Instant::now() + timeout;
        let mut st = self.state.lock().expect("mailbox lock");
        loop {
            if let Some(msg) = st.queues.get_mut(&(source, tag)).and_then(|q| q.pop_front()) {
                return Ok(msg);
            }
            if st.closed[source] {
                return Err(CommError::PeerClosed(source));
            }
            let now = Instant::now();
            if now >= deadline {
                return Err(CommError::Timeout { peer: source, tag });
            }
            st = self.cv.wait_timeout(st, deadline - now).expect("mailbox lock").0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_per_channel() {
        let mb = Mailbox::new(2);
        mb.push(1, 7, vec![1]);
        mb.push(1, 8, vec![9]);
        mb.push(1, 7, vec![2]);
        let t = Duration::from_millis(10);
        assert_eq!(mb.pop(1, 7, t).unwrap(), vec![1]);
        assert_eq!(mb.pop(1, 7, t).unwrap(), vec![2]);
        assert_eq!(mb.pop(1, 8, t).unwrap(), vec![9]);
        assert!(matches!(mb.pop(1, 7, t), Err(CommError::Timeout { peer: 1, tag: 7 })));
    }

    #[test]
    fn closed_peer_drains_then_errors() {
        let mb = Mailbox::new(2);
        mb.push(0, 1, vec![5]);
        mb.close(0);
        let t = Duration::from_millis(10);
        assert_eq!(mb.pop(0, 1, t).unwrap(), vec![5]);
        assert_eq!(mb.pop(0, 1, t), Err(CommError::PeerClosed(0)));
    }
}
