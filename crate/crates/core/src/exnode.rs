//! Election with confirmation.
//!
//! An extended node runs the basic node logic and also remembers the
//! greatest nominee it has seen. When its own nomination comes back it sends
//! a `Winner` announcement around the ring; the others pass it on only if it
//! names the greatest nominee they saw, and the winner confirms once its
//! announcement returns.

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use crate::actor::{ActorId, AnyMessage, Client, Context, Crash, Effects, Envelope, Message};
use crate::completion::CompletionCell;
use crate::election::{
    captured_len, conclude, node_intent, ring_election, ElectionError, ElectionOutcome, Msg,
    NodeState,
};
use crate::permute::RandomRange;

/// Announces the elected node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Winner<I = ActorId>(pub I);

impl<I: fmt::Display> fmt::Display for Winner<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Winner ({})", self.0)
    }
}

impl Message for Winner {
    const NAME: &'static str = "Winner";

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExnodeState {
    pub node: NodeState,
    pub greatest: ActorId,
}

impl ExnodeState {
    /// A fresh node has seen only itself.
    pub fn new(me: ActorId) -> Self {
        ExnodeState {
            node: NodeState::Uninitialized,
            greatest: me,
        }
    }
}

/// One step of an extended node. Accepts both [`Msg`] and [`Winner`];
/// anything else goes back to its sender.
pub fn exnode_intent<E: Effects>(
    state: ExnodeState,
    envelope: Envelope<AnyMessage>,
    fx: &mut E,
) -> Result<ExnodeState, Crash> {
    let envelope = match envelope.downcast::<Msg>() {
        Ok(envelope) => return on_msg(state, envelope, fx),
        Err(other) => other,
    };
    match envelope.downcast::<Winner>() {
        Ok(envelope) => on_winner(state, envelope.message, fx),
        Err(other) => {
            fx.reject(other);
            Ok(state)
        }
    }
}

fn on_msg<E: Effects>(
    state: ExnodeState,
    envelope: Envelope<Msg>,
    fx: &mut E,
) -> Result<ExnodeState, Crash> {
    let message = envelope.message;
    let node = node_intent(state.node, envelope, fx)?;
    let NodeState::Member { next } = node else {
        return Err(Crash::new("exnode: node is still uninitialized"));
    };
    let me = fx.self_id();
    let greatest = match message {
        Msg::Nominate { nominee } if nominee == me => {
            fx.send(next, Winner(me))?;
            state.greatest
        }
        Msg::Nominate { nominee } => state.greatest.max(nominee),
        _ => state.greatest,
    };
    Ok(ExnodeState { node, greatest })
}

fn on_winner<E: Effects>(
    state: ExnodeState,
    Winner(winner): Winner,
    fx: &mut E,
) -> Result<ExnodeState, Crash> {
    let NodeState::Member { next } = state.node else {
        return Err(Crash::new(format!(
            "exnode: unhandled {} while uninitialized",
            Winner(winner)
        )));
    };
    let me = fx.self_id();
    if winner == me {
        fx.emit(format_args!("{me}: Confirmed"));
    } else if winner == state.greatest {
        fx.send(next, Winner(winner))?;
    } else {
        fx.emit(format_args!("Unexpected winner"));
    }
    Ok(state)
}

/// [`exnode_intent`] that also reports a confirmed winner into `done`.
pub fn confirming_intent(
    done: Arc<CompletionCell<ActorId>>,
) -> impl FnMut(ExnodeState, Envelope<AnyMessage>, &mut Context) -> Result<ExnodeState, Crash>
       + Send
       + 'static {
    move |state, envelope, cx| {
        let me = cx.self_id();
        let confirmed = envelope.message.downcast_ref::<Winner>() == Some(&Winner(me));
        let state = exnode_intent(state, envelope, cx)?;
        if confirmed {
            done.put(me)
                .map_err(|_| Crash::new("second confirmed winner"))?;
        }
        Ok(state)
    }
}

/// Runs an election with confirmation. It ends when the winner confirms and
/// the ring has gone quiet; nodes are stopped before this returns.
pub fn extended_election<R: RandomRange + ?Sized>(
    coordinator: &Client,
    n: usize,
    rng: &mut R,
    timeout: Duration,
) -> Result<ElectionOutcome, ElectionError> {
    let done = Arc::new(CompletionCell::new());
    let mark = captured_len(coordinator.runtime());
    let ring = ring_election(coordinator, n, rng, |rt| {
        rt.spawn_with(ExnodeState::new, confirming_intent(Arc::clone(&done)))
    })?;
    conclude(coordinator.runtime(), ring, &done, timeout, mark)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actor::Recorder;
    use proptest::prelude::*;

    fn id(raw: u64) -> ActorId {
        ActorId::from_raw(raw)
    }

    fn member(next: u64, greatest: u64) -> ExnodeState {
        ExnodeState {
            node: NodeState::Member { next: id(next) },
            greatest: id(greatest),
        }
    }

    fn step<M: Message>(
        me: u64,
        state: ExnodeState,
        message: M,
    ) -> (Result<ExnodeState, Crash>, Recorder) {
        let mut fx = Recorder::new(id(me));
        let envelope = Envelope {
            sender: id(1),
            message: AnyMessage::new(message),
        };
        (exnode_intent(state, envelope, &mut fx), fx)
    }

    #[test]
    fn own_nomination_announces_winner() {
        let (next, fx) = step(7, member(9, 7), Msg::Nominate { nominee: id(7) });
        assert_eq!(next.unwrap(), member(9, 7));
        assert_eq!(fx.events, vec!["ActorId 7: I win"]);
        assert_eq!(
            fx.rendered(),
            vec![(id(9), "Winner (ActorId 7)".to_string())]
        );
    }

    #[test]
    fn nominations_raise_the_greatest_seen() {
        let (next, fx) = step(7, member(9, 7), Msg::Nominate { nominee: id(12) });
        assert_eq!(next.unwrap(), member(9, 12));
        assert_eq!(
            fx.rendered(),
            vec![(id(9), "Nominate {nominee = ActorId 12}".to_string())]
        );

        let (next, fx) = step(7, member(9, 12), Msg::Nominate { nominee: id(3) });
        assert_eq!(next.unwrap(), member(9, 12));
        assert_eq!(fx.events, vec!["Ignored nomination"]);
    }

    #[test]
    fn winner_handling() {
        let (_, fx) = step(7, member(9, 12), Winner(id(12)));
        assert_eq!(
            fx.rendered(),
            vec![(id(9), "Winner (ActorId 12)".to_string())]
        );

        let (_, fx) = step(7, member(9, 7), Winner(id(7)));
        assert!(fx.sent.is_empty());
        assert_eq!(fx.events, vec!["ActorId 7: Confirmed"]);

        let (_, fx) = step(7, member(9, 12), Winner(id(10)));
        assert!(fx.sent.is_empty());
        assert_eq!(fx.events, vec!["Unexpected winner"]);
    }

    #[test]
    fn winner_before_init_crashes() {
        let (next, _) = step(7, ExnodeState::new(id(7)), Winner(id(7)));
        assert!(next.is_err());
    }

    #[test]
    fn foreign_messages_are_rejected() {
        let (next, fx) = step(
            7,
            member(9, 7),
            crate::actor::Fault::TypeMismatch {
                offending_type: "X",
                recipient: id(3),
            },
        );
        assert_eq!(next.unwrap(), member(9, 7));
        assert_eq!(fx.rejected.len(), 1);
        assert!(fx.sent.is_empty());
    }

    fn arb_msg() -> impl Strategy<Value = Msg> {
        prop_oneof![
            (1u64..20).prop_map(|n| Msg::Init { next: id(n) }),
            Just(Msg::Start),
            (1u64..20).prop_map(|n| Msg::Nominate { nominee: id(n) }),
        ]
    }

    proptest! {
        // On election traffic, the extended node does exactly what the basic
        // node does, plus at most one Winner send.
        #[test]
        fn extends_basic_node(
            me in 1u64..20,
            init in proptest::option::of(1u64..20),
            greatest in 1u64..20,
            msg in arb_msg(),
        ) {
            let node = init.map_or(NodeState::Uninitialized, |n| NodeState::Member { next: id(n) });
            let state = ExnodeState { node, greatest: id(greatest) };

            let mut basic_fx = Recorder::new(id(me));
            let basic = node_intent(node, Envelope { sender: id(1), message: msg }, &mut basic_fx);
            let (extended, ex_fx) = step(me, state, msg);

            prop_assert_eq!(&basic_fx.events, &ex_fx.events);
            match basic {
                Err(_) => prop_assert!(extended.is_err()),
                Ok(basic_next) => {
                    let extended = extended.unwrap();
                    prop_assert_eq!(extended.node, basic_next);
                    let basic_sends = basic_fx.rendered();
                    let ex_sends = ex_fx.rendered();
                    prop_assert_eq!(&ex_sends[..basic_sends.len()], &basic_sends[..]);
                    let extra = &ex_sends[basic_sends.len()..];
                    if msg == (Msg::Nominate { nominee: id(me) }) {
                        let NodeState::Member { next } = basic_next else { unreachable!() };
                        prop_assert_eq!(extra, &[(next, format!("Winner (ActorId {me})"))][..]);
                    } else {
                        prop_assert!(extra.is_empty());
                    }
                }
            }
        }
    }
}
