//! Bounded FIFO handoff between pipeline workers.
//!
//! A full queue blocks the producer (backpressure), an empty queue blocks
//! the consumer. `close` propagates end-of-stream: consumers drain the
//! remaining items and then see `None`. `cancel` aborts both sides, used
//! for fail-fast shutdown when any worker errors. Every blocking wait is
//! bounded by a watchdog so a stalled pipeline turns into an error
//! instead of a hang.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Why a blocked queue operation gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum QueueStop {
    /// The pipeline is shutting down after a failure elsewhere.
    Cancelled,
    /// No progress within the watchdog window.
    Watchdog {
        site: &'static str,
        waited_ms: u64,
    },
}

struct State<T> {
    items: VecDeque<T>,
    closed: bool,
    cancelled: bool,
    high_water: usize,
}

pub(crate) struct BoundedQueue<T> {
    name: &'static str,
    capacity: usize,
    watchdog: Duration,
    state: Mutex<State<T>>,
    not_full: Condvar,
    not_empty: Condvar,
}

impl<T> BoundedQueue<T> {
    pub fn new(name: &'static str, capacity: usize, watchdog: Duration) -> Self {
        assert!(capacity >= 1, "queue capacity must be at least 1");
        BoundedQueue {
            name,
            capacity,
            watchdog,
            state: Mutex::new(State {
                items: VecDeque::with_capacity(capacity),
                closed: false,
                cancelled: false,
                high_water: 0,
            }),
            not_full: Condvar::new(),
            not_empty: Condvar::new(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Block until there is room, then enqueue.
    pub fn push(&self, item: T) -> Result<(), QueueStop> {
        let deadline = Instant::now() + self.watchdog;
        let mut state = self.state.lock().unwrap();
        loop {
            if state.cancelled {
                return Err(QueueStop::Cancelled);
            }
            debug_assert!(!state.closed, "push into closed queue `{}`", self.name);
            if state.items.len() < self.capacity {
                state.items.push_back(item);
                state.high_water = state.high_water.max(state.items.len());
                self.not_empty.notify_one();
                return Ok(());
            }
            let Some(remaining) = deadline.checked_duration_since(Instant::now()) else {
                return Err(QueueStop::Watchdog {
                    site: self.name,
                    waited_ms: self.watchdog.as_millis() as u64,
                });
            };
            let (guard, _) = self.not_full.wait_timeout(state, remaining).unwrap();
            state = guard;
        }
    }

    /// Block until an item arrives; `None` once closed and drained.
    pub fn pop(&self) -> Result<Option<T>, QueueStop> {
        let deadline = Instant::now() + self.watchdog;
        let mut state = self.state.lock().unwrap();
        loop {
            if state.cancelled {
                return Err(QueueStop::Cancelled);
            }
            if let Some(item) = state.items.pop_front() {
                self.not_full.notify_one();
                return Ok(Some(item));
            }
            if state.closed {
                return Ok(None);
            }
            let Some(remaining) = deadline.checked_duration_since(Instant::now()) else {
                return Err(QueueStop::Watchdog {
                    site: self.name,
                    waited_ms: self.watchdog.as_millis() as u64,
                });
            };
            let (guard, _) = self.not_empty.wait_timeout(state, remaining).unwrap();
            state = guard;
        }
    }

    /// Mark end-of-stream. Already-queued items remain poppable.
    pub fn close(&self) {
        let mut state = self.state.lock().unwrap();
        state.closed = true;
        self.not_empty.notify_all();
    }

    /// Abort both ends immediately; queued items are dropped on the floor.
    pub fn cancel(&self) {
        let mut state = self.state.lock().unwrap();
        state.cancelled = true;
        self.not_empty.notify_all();
        self.not_full.notify_all();
    }

    /// Largest queue depth observed so far.
    pub fn high_water(&self) -> usize {
        self.state.lock().unwrap().high_water
    }
}
