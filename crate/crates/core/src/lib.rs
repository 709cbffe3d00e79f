//! Leader election on a unidirectional ring, run two ways: as actors on a
//! small message-passing runtime, and as tasks wired together by channels.

pub mod actor;
pub mod bench;
pub mod channels;
pub mod completion;
pub mod election;
pub mod exnode;
pub mod permute;
pub mod tally;

pub use actor::{ActorId, AnyMessage, Client, Context, Effects, Envelope, Message, Runtime};
pub use completion::CompletionCell;
pub use permute::{permute, RandomRange, Rng};
