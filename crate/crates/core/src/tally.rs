use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Counts messages sent and messages settled (handled or discarded), and
/// lets a thread wait until the two agree.
#[derive(Debug, Default)]
pub struct Tally {
    sent: AtomicU64,
    settled: AtomicU64,
    waiters: AtomicUsize,
    lock: Mutex<()>,
    quiet: Condvar,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sent(&self) -> u64 {
        self.sent.load(Ordering::SeqCst)
    }

    pub fn settled(&self) -> u64 {
        self.settled.load(Ordering::SeqCst)
    }

    pub fn record_sent(&self) {
        self.sent.fetch_add(1, Ordering::SeqCst);
    }

    pub fn settle(&self, count: u64) {
        self.settled.fetch_add(count, Ordering::SeqCst);
        if self.waiters.load(Ordering::SeqCst) > 0 {
            let _guard = self.lock.lock().unwrap();
            self.quiet.notify_all();
        }
    }

    pub fn is_quiescent(&self) -> bool {
        // Settled is read first. A message settles only after everything it
        // caused was sent, so equality with the later read of `sent` means
        // nothing was in flight at that read.
        let settled = self.settled.load(Ordering::SeqCst);
        settled == self.sent.load(Ordering::SeqCst)
    }

    pub fn wait_quiescent(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        self.waiters.fetch_add(1, Ordering::SeqCst);
        let mut guard = self.lock.lock().unwrap();
        let quiet = loop {
            if self.is_quiescent() {
                break true;
            }
            let now = Instant::now();
            if now >= deadline {
                break false;
            }
            let step = (deadline - now).min(Duration::from_millis(10));
            guard = self.quiet.wait_timeout(guard, step).unwrap().0;
        };
        drop(guard);
        self.waiters.fetch_sub(1, Ordering::SeqCst);
        quiet
    }
}
