use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("completion cell was already written")]
pub struct AlreadyWritten;

/// A write-once cell that one thread fills and another waits on.
#[derive(Debug, Default)]
pub struct CompletionCell<T> {
    value: Mutex<Option<T>>,
    filled: Condvar,
}

impl<T: Clone> CompletionCell<T> {
    pub fn new() -> Self {
        CompletionCell {
            value: Mutex::new(None),
            filled: Condvar::new(),
        }
    }

    pub fn put(&self, value: T) -> Result<(), AlreadyWritten> {
        let mut slot = self.value.lock().unwrap();
        if slot.is_some() {
            return Err(AlreadyWritten);
        }
        *slot = Some(value);
        self.filled.notify_all();
        Ok(())
    }

    pub fn get(&self) -> Option<T> {
        self.value.lock().unwrap().clone()
    }

    pub fn wait_timeout(&self, timeout: Duration) -> Option<T> {
        let deadline = Instant::now() + timeout;
        let mut slot = self.value.lock().unwrap();
        loop {
            if let Some(value) = slot.as_ref() {
                return Some(value.clone());
            }
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            slot = self.filled.wait_timeout(slot, deadline - now).unwrap().0;
        }
    }
}
