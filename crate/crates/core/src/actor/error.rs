use thiserror::Error;

use super::ActorId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("the runtime has been shut down")]
    RuntimeShutDown,
    #[error("{0} was never spawned on this runtime")]
    UnknownRecipient(ActorId),
    #[error("called outside of an actor")]
    NotInActor,
    #[error("could not start the executor: {0}")]
    Executor(String),
}

/// An intent failure. Returning one halts the actor with
/// [`HaltReason::Crashed`](super::HaltReason::Crashed).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{reason}")]
pub struct Crash {
    reason: String,
}

impl Crash {
    pub fn new(reason: impl Into<String>) -> Self {
        Crash {
            reason: reason.into(),
        }
    }

    pub fn reason(&self) -> &str {
        &self.reason
    }
}

impl From<RuntimeError> for Crash {
    fn from(err: RuntimeError) -> Self {
        Crash::new(err.to_string())
    }
}
