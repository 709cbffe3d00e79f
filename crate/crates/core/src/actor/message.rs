//! Message typing: the self-describing [`Message`] trait, the type-erased
//! [`AnyMessage`] payload that travels between actors, and the envelope it
//! travels in.
//!
//! Every send upcasts to `AnyMessage`; every receive downcasts back to the
//! intent's message type. A failed downcast is a type fault, reported to the
//! envelope's sender rather than crashing the recipient.

use std::any::Any;
use std::fmt;

use super::ActorId;

/// A value that can be sent to an actor.
///
/// `NAME` is a stable, human-readable type tag used when reporting a type
/// mismatch. `render` produces the text that appears in trace lines.
pub trait Message: Send + 'static {
    const NAME: &'static str;

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

trait Erased: Send {
    fn type_name(&self) -> &'static str;
    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
    fn as_any(&self) -> &dyn Any;
    fn into_any(self: Box<Self>) -> Box<dyn Any + Send>;
}

impl<M: Message> Erased for M {
    fn type_name(&self) -> &'static str {
        M::NAME
    }

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Message::render(self, f)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }

    fn into_any(self: Box<Self>) -> Box<dyn Any + Send> {
        self
    }
}

/// A type-erased message payload.
pub struct AnyMessage(Box<dyn Erased>);

impl AnyMessage {
    pub fn new<M: Message>(message: M) -> Self {
        AnyMessage(Box::new(message))
    }

    pub fn type_name(&self) -> &'static str {
        self.0.type_name()
    }

    pub fn is<M: Message>(&self) -> bool {
        self.0.as_any().is::<M>()
    }

    pub fn downcast_ref<M: Message>(&self) -> Option<&M> {
        self.0.as_any().downcast_ref()
    }

    /// Recovers the concrete message, handing the payload back untouched
    /// when it is some other type.
    pub fn downcast<M: Message>(self) -> Result<M, AnyMessage> {
        if self.is::<M>() {
            let any = self.0.into_any();
            Ok(*any.downcast::<M>().expect("type checked above"))
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for AnyMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.render(f)
    }
}

impl fmt::Debug for AnyMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Message types an intent can be written against.
///
/// Every [`Message`] receives by exact-type downcast. `AnyMessage` receives
/// everything, which is how an intent takes over its own downcasting.
pub trait Receive: Sized + Send + 'static {
    fn receive(payload: AnyMessage) -> Result<Self, AnyMessage>;
}

impl<M: Message> Receive for M {
    fn receive(payload: AnyMessage) -> Result<Self, AnyMessage> {
        payload.downcast()
    }
}

impl Receive for AnyMessage {
    fn receive(payload: AnyMessage) -> Result<Self, AnyMessage> {
        Ok(payload)
    }
}

/// A self-addressed message.
#[derive(Debug)]
pub struct Envelope<M> {
    pub sender: ActorId,
    pub message: M,
}

impl<M> Envelope<M> {
    pub fn map<N>(self, f: impl FnOnce(M) -> N) -> Envelope<N> {
        Envelope {
            sender: self.sender,
            message: f(self.message),
        }
    }
}

impl Envelope<AnyMessage> {
    /// Downcasts the payload, keeping the sender. On mismatch the original
    /// envelope comes back so it can be returned to its sender.
    pub fn downcast<M: Message>(self) -> Result<Envelope<M>, Envelope<AnyMessage>> {
        let Envelope { sender, message } = self;
        match message.downcast::<M>() {
            Ok(message) => Ok(Envelope { sender, message }),
            Err(message) => Err(Envelope { sender, message }),
        }
    }
}

/// Why an actor stopped running.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HaltReason {
    /// The actor's handle went away without being stopped (clients only).
    Normal,
    /// `stop` or `shutdown` was called on it.
    Stopped,
    /// The intent returned an error or panicked.
    Crashed(String),
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Normal => f.write_str("Normal"),
            HaltReason::Stopped => f.write_str("Stopped"),
            HaltReason::Crashed(why) => write!(f, "Crashed {why:?}"),
        }
    }
}

/// Runtime-generated notices, delivered as ordinary envelope payloads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fault {
    /// `recipient` could not decode a message of type `offending_type` that
    /// the envelope's receiver previously sent it.
    TypeMismatch {
        offending_type: &'static str,
        recipient: ActorId,
    },
    /// `actor` has halted; sent to everyone registered with `on_halt`.
    Halted { actor: ActorId, reason: HaltReason },
}

impl Message for Fault {
    const NAME: &'static str = "Fault";

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::TypeMismatch {
                offending_type,
                recipient,
            } => write!(
                f,
                "TypeMismatch {{offending_type = {offending_type:?}, recipient = {recipient}}}"
            ),
            Fault::Halted { actor, reason } => {
                write!(f, "Halted {{actor = {actor}, reason = {reason}}}")
            }
        }
    }
}
