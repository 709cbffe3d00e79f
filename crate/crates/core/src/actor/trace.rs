use std::fmt;
use std::io::Write;
use std::sync::Mutex;

use super::{ActorId, AnyMessage};

/// One observable step: a send, or a free-form event line from an intent.
pub enum TraceRecord<'a> {
    Send {
        from: ActorId,
        to: ActorId,
        message: &'a AnyMessage,
    },
    Event(fmt::Arguments<'a>),
}

impl fmt::Display for TraceRecord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceRecord::Send { from, to, message } => {
                write!(f, "{from} send {message} to {to}")
            }
            TraceRecord::Event(args) => f.write_fmt(*args),
        }
    }
}

/// Destination for trace lines. Implementations must be cheap to call from
/// many tasks at once.
pub trait TraceSink: Send + Sync {
    fn record(&self, record: TraceRecord<'_>);

    /// Lines captured so far, for sinks that keep them.
    fn captured(&self) -> Option<Vec<String>> {
        None
    }
}

/// Writes each record as one line on stdout.
#[derive(Debug, Default)]
pub struct StdoutSink;

impl TraceSink for StdoutSink {
    fn record(&self, record: TraceRecord<'_>) {
        let mut out = std::io::stdout().lock();
        // A closed stdout is not worth crashing an actor over.
        let _ = writeln!(out, "{record}");
    }
}

/// Keeps every line in memory, in the order records arrived.
#[derive(Debug, Default)]
pub struct MemorySink {
    lines: Mutex<Vec<String>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lines(&self) -> Vec<String> {
        self.lines.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.lines.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl TraceSink for MemorySink {
    fn record(&self, record: TraceRecord<'_>) {
        let line = record.to_string();
        self.lines.lock().unwrap().push(line);
    }

    fn captured(&self) -> Option<Vec<String>> {
        Some(self.lines())
    }
}
