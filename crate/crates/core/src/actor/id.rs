use std::fmt;

/// Identity of an actor (or client handle) within one [`Runtime`](super::Runtime).
///
/// Ids come from a per-runtime counter, so a later spawn always compares
/// greater than an earlier one. User code cannot mint them: an `ActorId` is
/// only ever obtained from `spawn`, `self_id`, a client, or an envelope's
/// sender field.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActorId(u64);

impl ActorId {
    pub(crate) const fn from_raw(raw: u64) -> Self {
        ActorId(raw)
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActorId {}", self.0)
    }
}

impl fmt::Debug for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
