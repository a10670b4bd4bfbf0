//! Time sources for the benchmarks. Everything that reports a rate reads
//! time through [`Clock`] so tests can script it.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Instant;

pub trait Clock: Sync {
    /// Seconds since an arbitrary fixed origin; never decreases.
    fn now(&self) -> f64;
}

#[derive(Debug)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock { origin: Instant::now() }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Returns the scripted readings in order, then repeats the last one forever.
#[derive(Debug)]
pub struct MockClock {
    script: Mutex<(VecDeque<f64>, f64)>,
}

impl MockClock {
    pub fn new(readings: impl IntoIterator<Item = f64>) -> Self {
        MockClock {
            script: Mutex::new((readings.into_iter().collect(), 0.0)),
        }
    }
}

impl Clock for MockClock {
    fn now(&self) -> f64 {
        let mut s = self.script.lock().expect("mock clock lock");
        if let Some(t) = s.0.pop_front() {
            s.1 = t;
        }
        s.1
    }
}
