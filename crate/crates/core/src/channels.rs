//! The same extended election, with nodes wired together by FIFO channels
//! instead of actor mailboxes.
//!
//! Node `i` reads channel `i` and writes channel `i + 1`. A node has no
//! successor id and no `Init` message: its successor is whoever reads the
//! channel it writes. The only state it keeps is the greatest nominee seen.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;
use tokio::sync::mpsc;

use crate::actor::{Crash, TraceRecord, TraceSink};
use crate::completion::CompletionCell;
use crate::election::Msg;
use crate::exnode::Winner;
use crate::permute::{permute, RandomRange};
use crate::tally::Tally;

/// Identity of a channel node, assigned in spawn order. Prints like an
/// actor id so traces from both implementations read the same.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeToken(u64);

impl NodeToken {
    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl fmt::Display for NodeToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActorId {}", self.0)
    }
}

/// Either election traffic or a winner declaration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChMsg {
    Msg(Msg<NodeToken>),
    Winner(Winner<NodeToken>),
}

/// The writing end of a node's outgoing channel. Counts every write.
#[derive(Clone)]
pub struct Link {
    tx: mpsc::UnboundedSender<ChMsg>,
    tally: Arc<Tally>,
}

impl Link {
    fn write(&self, message: ChMsg) -> Result<(), Crash> {
        self.tally.record_sent();
        self.tx
            .send(message)
            .map_err(|_| Crash::new("channel closed"))
    }
}

pub struct ChanPair {
    pub recv: mpsc::UnboundedReceiver<ChMsg>,
    pub send: Link,
}

struct ChanNode {
    me: NodeToken,
    done: Arc<CompletionCell<NodeToken>>,
    send: Link,
    trace: Option<Arc<dyn TraceSink>>,
}

impl ChanNode {
    fn emit(&self, line: fmt::Arguments<'_>) {
        if let Some(sink) = &self.trace {
            sink.record(TraceRecord::Event(line));
        }
    }

    fn node_part(&self, message: Msg<NodeToken>) -> Result<(), Crash> {
        let me = self.me;
        match message {
            Msg::Start => {
                self.emit(format_args!("{me}: nominate self"));
                self.send.write(ChMsg::Msg(Msg::Nominate { nominee: me }))
            }
            Msg::Nominate { nominee } if nominee == me => {
                self.emit(format_args!("{me}: I win"));
                Ok(())
            }
            Msg::Nominate { nominee } if me < nominee => {
                self.emit(format_args!("{me}: nominate {nominee}"));
                self.send.write(ChMsg::Msg(Msg::Nominate { nominee }))
            }
            Msg::Nominate { .. } => {
                self.emit(format_args!("Ignored nominee"));
                Ok(())
            }
            other => Err(Crash::new(format!("channel node: unhandled {other}"))),
        }
    }

    fn exnode_part(&self, greatest: NodeToken, message: ChMsg) -> Result<NodeToken, Crash> {
        let me = self.me;
        match message {
            ChMsg::Msg(m) => {
                self.node_part(m)?;
                match m {
                    Msg::Nominate { nominee } if nominee == me => {
                        self.send.write(ChMsg::Winner(Winner(me)))?;
                        Ok(greatest)
                    }
                    Msg::Nominate { nominee } => Ok(nominee.max(greatest)),
                    _ => Ok(greatest),
                }
            }
            ChMsg::Winner(Winner(w)) => {
                if w == me {
                    self.emit(format_args!("{me}: Confirmed"));
                    self.done
                        .put(me)
                        .map_err(|_| Crash::new("second confirmed winner"))?;
                } else if w == greatest {
                    self.send.write(ChMsg::Winner(Winner(w)))?;
                } else {
                    self.emit(format_args!("Unexpected winner"));
                }
                Ok(greatest)
            }
        }
    }
}

/// Body of one channel node. Runs until its receive channel closes or the
/// task is aborted.
pub async fn chan_node(
    done: Arc<CompletionCell<NodeToken>>,
    chans: ChanPair,
    me: NodeToken,
    trace: Option<Arc<dyn TraceSink>>,
) -> Result<(), Crash> {
    let ChanPair { mut recv, send } = chans;
    let tally = Arc::clone(&send.tally);
    let node = ChanNode {
        me,
        done,
        send,
        trace,
    };
    let mut greatest = me;
    while let Some(message) = recv.recv().await {
        let result = node.exnode_part(greatest, message);
        tally.settle(1);
        greatest = result?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("a ring needs at least two nodes, got {0}")]
    InvalidRingSize(usize),
    #[error("channel election did not finish within {0:?}")]
    Timeout(Duration),
    #[error("confirmed {winner} but the greatest node is {greatest}")]
    WrongWinner {
        winner: NodeToken,
        greatest: NodeToken,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelOutcome {
    pub winner: NodeToken,
    /// Token of the node at each ring position.
    pub ring: Vec<NodeToken>,
    /// Total channel writes, `Start`s included.
    pub writes: u64,
}

impl ChannelOutcome {
    pub fn winner_index(&self) -> Option<usize> {
        self.ring.iter().position(|&t| t == self.winner)
    }
}

/// Runs a channel ring of `n` nodes on `executor` and checks that the
/// greatest token won.
///
/// Ring position `j` gets the `r`-th token, where `r` is element `j` of a
/// permutation of `0..n` drawn from `rng`. That matches the actor ring built
/// from the same seed, where position `j` holds the `r`-th spawned actor, so
/// both elect the same ring position.
///
/// Blocks the calling thread; do not call from inside `executor`.
pub fn bench_channels<R: RandomRange + ?Sized>(
    executor: &tokio::runtime::Handle,
    n: usize,
    rng: &mut R,
    trace: Option<Arc<dyn TraceSink>>,
    timeout: Duration,
) -> Result<ChannelOutcome, ChannelError> {
    if n < 2 {
        return Err(ChannelError::InvalidRingSize(n));
    }
    let deadline = Instant::now() + timeout;
    let done = Arc::new(CompletionCell::new());
    let tally = Arc::new(Tally::new());
    let (txs, rxs): (Vec<_>, Vec<_>) = (0..n).map(|_| mpsc::unbounded_channel()).unzip();
    let mut specs: Vec<Option<ChanPair>> = rxs
        .into_iter()
        .enumerate()
        .map(|(i, recv)| {
            Some(ChanPair {
                recv,
                send: Link {
                    tx: txs[(i + 1) % n].clone(),
                    tally: Arc::clone(&tally),
                },
            })
        })
        .collect();

    let ranks = permute((0..n).collect::<Vec<_>>(), rng);
    let mut spawn_order = vec![0; n];
    for (position, &rank) in ranks.iter().enumerate() {
        spawn_order[rank] = position;
    }
    let mut ring = vec![NodeToken(0); n];
    let mut tasks = Vec::with_capacity(n);
    for (spawned, position) in spawn_order.into_iter().enumerate() {
        let me = NodeToken(spawned as u64 + 1);
        ring[position] = me;
        let chans = specs[position].take().expect("each node spawns once");
        let node = chan_node(Arc::clone(&done), chans, me, trace.clone());
        tasks.push(executor.spawn(async move {
            if let Err(crash) = node.await {
                log::error!("channel node {me} crashed: {}", crash.reason());
            }
        }));
    }

    // Start goes into every channel, in channel order.
    for tx in txs {
        let link = Link {
            tx,
            tally: Arc::clone(&tally),
        };
        link.write(ChMsg::Msg(Msg::Start))
            .expect("receivers are alive");
    }

    let winner = done.wait_timeout(timeout);
    let quiet = winner.is_some()
        && tally.wait_quiescent(deadline.saturating_duration_since(Instant::now()));
    for task in &tasks {
        task.abort();
    }
    executor.block_on(async {
        for task in tasks {
            let _ = task.await;
        }
    });
    let winner = winner.ok_or(ChannelError::Timeout(timeout))?;
    if !quiet {
        return Err(ChannelError::Timeout(timeout));
    }
    let greatest = *ring.iter().max().expect("ring is not empty");
    if winner != greatest {
        return Err(ChannelError::WrongWinner { winner, greatest });
    }
    Ok(ChannelOutcome {
        winner,
        ring,
        writes: tally.sent(),
    })
}
