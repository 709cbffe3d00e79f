//! Ring leader election, Chang-Roberts style.
//!
//! Every node nominates itself to its successor. A node forwards a
//! nomination only when the nominee is greater than itself, so the one
//! nomination that makes it all the way around belongs to the greatest id.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::actor::{
    ActorId, Client, Context, Crash, Effects, Envelope, Message, RuntimeError, RuntimeHandle,
};
use crate::completion::CompletionCell;
use crate::permute::{permute, RandomRange};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeState {
    Uninitialized,
    Member { next: ActorId },
}

/// Election traffic. `I` is the node identity; actors use [`ActorId`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Msg<I = ActorId> {
    Init { next: I },
    Start,
    Nominate { nominee: I },
}

impl<I: fmt::Display> fmt::Display for Msg<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Msg::Init { next } => write!(f, "Init {{next = {next}}}"),
            Msg::Start => f.write_str("Start"),
            Msg::Nominate { nominee } => write!(f, "Nominate {{nominee = {nominee}}}"),
        }
    }
}

impl Message for Msg {
    const NAME: &'static str = "Msg";

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One step of a ring node.
pub fn node_intent<E: Effects>(
    state: NodeState,
    envelope: Envelope<Msg>,
    fx: &mut E,
) -> Result<NodeState, Crash> {
    match (state, envelope.message) {
        (NodeState::Uninitialized, Msg::Init { next }) => Ok(NodeState::Member { next }),
        (NodeState::Member { next }, Msg::Start) => {
            let me = fx.self_id();
            fx.send(next, Msg::Nominate { nominee: me })?;
            Ok(state)
        }
        (NodeState::Member { next }, Msg::Nominate { nominee }) => {
            let me = fx.self_id();
            if nominee == me {
                fx.emit(format_args!("{me}: I win"));
            } else if me < nominee {
                fx.send(next, Msg::Nominate { nominee })?;
            } else {
                fx.emit(format_args!("Ignored nomination"));
            }
            Ok(state)
        }
        (state, message) => Err(Crash::new(format!(
            "node: unhandled {message} in state {state:?}"
        ))),
    }
}

#[derive(Debug, Error)]
pub enum ElectionError {
    #[error("a ring needs at least two nodes, got {0}")]
    InvalidRingSize(usize),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("election did not finish within {0:?}")]
    Timeout(Duration),
}

/// Spawns `n` nodes with `spawn_node`, shuffles them into a ring, and sends
/// every node its successor followed by `Start`. Returns the ring in order:
/// element `i` forwards to element `i + 1`, and the last wraps to the first.
pub fn ring_election<R, F>(
    coordinator: &Client,
    n: usize,
    rng: &mut R,
    mut spawn_node: F,
) -> Result<Vec<ActorId>, ElectionError>
where
    R: RandomRange + ?Sized,
    F: FnMut(&RuntimeHandle) -> Result<ActorId, RuntimeError>,
{
    if n < 2 {
        return Err(ElectionError::InvalidRingSize(n));
    }
    let runtime = coordinator.runtime();
    let nodes = (0..n)
        .map(|_| spawn_node(runtime))
        .collect::<Result<Vec<_>, _>>()?;
    let ring = permute(nodes, rng);
    for (i, &node) in ring.iter().enumerate() {
        coordinator.send(
            node,
            Msg::Init {
                next: ring[(i + 1) % n],
            },
        )?;
    }
    for &node in &ring {
        coordinator.send(node, Msg::Start)?;
    }
    Ok(ring)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionOutcome {
    pub winner: ActorId,
    pub ring: Vec<ActorId>,
    /// Trace lines recorded during the run; empty without a capturing sink.
    pub events: Vec<String>,
}

impl ElectionOutcome {
    /// Position of the winner in the ring.
    pub fn winner_index(&self) -> Option<usize> {
        self.ring.iter().position(|&id| id == self.winner)
    }

    pub fn winner_is_greatest(&self) -> bool {
        self.ring.iter().max() == Some(&self.winner)
    }
}

/// Runs a basic election: the round ends when some node sees its own
/// nomination come back. Nodes are stopped before this returns.
pub fn basic_election<R: RandomRange + ?Sized>(
    coordinator: &Client,
    n: usize,
    rng: &mut R,
    timeout: Duration,
) -> Result<ElectionOutcome, ElectionError> {
    let done = Arc::new(CompletionCell::new());
    let mark = captured_len(coordinator.runtime());
    let ring = ring_election(coordinator, n, rng, |rt| {
        let done = Arc::clone(&done);
        rt.spawn(
            move |state, envelope: Envelope<Msg>, cx: &mut Context| {
                let me = cx.self_id();
                let won = envelope.message == Msg::Nominate { nominee: me };
                let state = node_intent(state, envelope, cx)?;
                if won {
                    done.put(me).map_err(|_| Crash::new("second winner"))?;
                }
                Ok(state)
            },
            NodeState::Uninitialized,
        )
    })?;
    conclude(coordinator.runtime(), ring, &done, timeout, mark)
}

pub(crate) fn captured_len(runtime: &RuntimeHandle) -> usize {
    runtime
        .trace_sink()
        .and_then(|sink| sink.captured())
        .map_or(0, |lines| lines.len())
}

/// Waits for a winner and for the ring to go quiet, then stops the ring.
pub(crate) fn conclude(
    runtime: &RuntimeHandle,
    ring: Vec<ActorId>,
    done: &CompletionCell<ActorId>,
    timeout: Duration,
    mark: usize,
) -> Result<ElectionOutcome, ElectionError> {
    let deadline = Instant::now() + timeout;
    let outcome = done
        .wait_timeout(timeout)
        .ok_or(ElectionError::Timeout(timeout))
        .and_then(|winner| {
            // Stragglers (ignored nominations, the last forwards) may still
            // be in flight after the winner is known.
            let left = deadline.saturating_duration_since(Instant::now());
            if runtime.wait_quiescent(left) {
                Ok(winner)
            } else {
                Err(ElectionError::Timeout(timeout))
            }
        });
    for &node in &ring {
        runtime.stop(node)?;
    }
    let winner = outcome?;
    let events = runtime
        .trace_sink()
        .and_then(|sink| sink.captured())
        .map(|lines| {
            lines
                .into_iter()
                .skip(mark)
                .filter(|l| !is_send_line(l))
                .collect()
        })
        .unwrap_or_default();
    Ok(ElectionOutcome {
        winner,
        ring,
        events,
    })
}

fn is_send_line(line: &str) -> bool {
    line.contains(" send ")
}
