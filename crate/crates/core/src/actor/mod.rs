//! The actor runtime.
//!
//! An actor is a lightweight task that owns a private state and a FIFO
//! mailbox. Its behaviour is an *intent*: a transition
//! `(state, envelope) -> state` that may send messages, spawn or stop actors,
//! and emit trace events while it runs. Intents are invoked one envelope at a
//! time, exactly once per accepted envelope.
//!
//! Messages travel type-erased as [`AnyMessage`]. The runtime downcasts each
//! payload to the intent's message type before calling it; on a mismatch the
//! recipient is left untouched and a [`Fault::TypeMismatch`] is returned to
//! the sender instead.

mod error;
mod id;
mod message;
mod runtime;
mod trace;

use std::fmt;

pub use error::{Crash, RuntimeError};
pub use id::ActorId;
pub use message::{AnyMessage, Envelope, Fault, HaltReason, Message, Receive};
pub(crate) use runtime::default_workers;
pub use runtime::{self_id, Builder, Client, Context, Runtime, RuntimeHandle};
pub use trace::{MemorySink, StdoutSink, TraceRecord, TraceSink};

/// What an intent may do to the outside world while handling an envelope.
///
/// [`Context`] is the runtime's implementation. Intents written against this
/// trait can also be driven directly, without a runtime.
pub trait Effects {
    fn self_id(&self) -> ActorId;

    fn send_any(&mut self, to: ActorId, message: AnyMessage) -> Result<(), RuntimeError>;

    /// Emits a trace event line. A no-op when tracing is off.
    fn emit(&mut self, line: fmt::Arguments<'_>);

    /// Return to sender: reports a [`Fault::TypeMismatch`] for `envelope` to
    /// whoever sent it. Faults themselves are never bounced back.
    fn reject(&mut self, envelope: Envelope<AnyMessage>);

    fn send<M: Message>(&mut self, to: ActorId, message: M) -> Result<(), RuntimeError>
    where
        Self: Sized,
    {
        self.send_any(to, AnyMessage::new(message))
    }
}

/// [`Effects`] that only write things down. Useful for stepping an intent
/// by hand.
#[derive(Debug)]
pub struct Recorder {
    pub me: ActorId,
    pub sent: Vec<(ActorId, AnyMessage)>,
    pub events: Vec<String>,
    pub rejected: Vec<Envelope<AnyMessage>>,
}

impl Recorder {
    pub fn new(me: ActorId) -> Self {
        Recorder {
            me,
            sent: Vec::new(),
            events: Vec::new(),
            rejected: Vec::new(),
        }
    }

    /// Sent messages as trace-style renderings, `(recipient, message)`.
    pub fn rendered(&self) -> Vec<(ActorId, String)> {
        self.sent
            .iter()
            .map(|(to, m)| (*to, m.to_string()))
            .collect()
    }
}

impl Effects for Recorder {
    fn self_id(&self) -> ActorId {
        self.me
    }

    fn send_any(&mut self, to: ActorId, message: AnyMessage) -> Result<(), RuntimeError> {
        self.sent.push((to, message));
        Ok(())
    }

    fn emit(&mut self, line: fmt::Arguments<'_>) {
        self.events.push(line.to_string());
    }

    fn reject(&mut self, envelope: Envelope<AnyMessage>) {
        self.rejected.push(envelope);
    }
}
