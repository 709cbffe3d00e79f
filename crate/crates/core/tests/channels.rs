mod common;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use ringleader::actor::{MemorySink, Runtime, TraceSink};
use ringleader::channels::{bench_channels, ChannelError};
use ringleader::exnode::extended_election;
use ringleader::Rng;

const WAIT: Duration = Duration::from_secs(30);

fn executor() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .build()
        .unwrap()
}

#[test]
fn two_nodes_elect_the_greater() {
    let exec = executor();
    let outcome = bench_channels(exec.handle(), 2, &mut Rng::seeded(0), None, WAIT).unwrap();
    assert_eq!(outcome.winner, *outcome.ring.iter().max().unwrap());
}

#[test]
fn small_rings_are_rejected() {
    let exec = executor();
    for n in [0, 1] {
        let err = bench_channels(exec.handle(), n, &mut Rng::seeded(0), None, WAIT).unwrap_err();
        assert!(matches!(err, ChannelError::InvalidRingSize(m) if m == n));
    }
}

#[test]
fn four_node_trace_has_the_expected_shape() {
    let exec = executor();
    let sink = Arc::new(MemorySink::new());
    let trace: Arc<dyn TraceSink> = sink.clone();
    let outcome =
        bench_channels(exec.handle(), 4, &mut Rng::seeded(11), Some(trace), WAIT).unwrap();
    let lines = sink.lines();
    let w = outcome.winner;
    let count = |line: &str| lines.iter().filter(|l| *l == line).count();
    assert_eq!(count(&format!("{w}: I win")), 1);
    assert_eq!(count(&format!("{w}: Confirmed")), 1);
    assert_eq!(
        lines
            .iter()
            .filter(|l| l.ends_with(": nominate self"))
            .count(),
        4
    );
    // Every nomination except the greatest's is dropped exactly once.
    assert_eq!(count("Ignored nominee"), 3);
    assert_eq!(lines.last().unwrap(), &format!("{w}: Confirmed"));
}

#[test]
fn large_ring_writes_match_the_oracle() {
    let exec = executor();
    let outcome = bench_channels(exec.handle(), 1024, &mut Rng::seeded(5), None, WAIT).unwrap();
    let ranks = common::ranks_of(&outcome.ring);
    assert_eq!(outcome.writes, common::channel_writes(&ranks));
}

#[test]
fn nominations_cross_each_channel_in_order() {
    let exec = executor();
    for seed in 0..10 {
        let sink = Arc::new(MemorySink::new());
        let trace: Arc<dyn TraceSink> = sink.clone();
        let outcome =
            bench_channels(exec.handle(), 16, &mut Rng::seeded(seed), Some(trace), WAIT).unwrap();
        // What each node wrote, in the order it wrote it.
        let mut sent: HashMap<String, Vec<String>> = HashMap::new();
        for line in sink.lines() {
            if let Some((node, what)) = line.split_once(": nominate ") {
                let nominee = if what == "self" {
                    node.to_string()
                } else {
                    what.to_string()
                };
                sent.entry(node.to_string()).or_default().push(nominee);
            }
        }
        let ring = &outcome.ring;
        for (j, node) in ring.iter().enumerate() {
            let next = ring[(j + 1) % ring.len()].to_string();
            let upstream = &sent[&node.to_string()];
            let forwarded: Vec<&String> = sent[&next].iter().filter(|m| **m != next).collect();
            // What the successor forwarded is a subsequence of what it read.
            let mut cursor = upstream.iter();
            for m in forwarded {
                assert!(
                    cursor.any(|u| u == m),
                    "seed {seed}: {next} forwarded {m} out of order"
                );
            }
        }
    }
}

#[test]
fn channels_and_actors_elect_the_same_ring_position() {
    let exec = executor();
    for n in [4, 64, 1024] {
        for seed in [1u64, 2, 3] {
            let rt = Runtime::new().unwrap();
            let coordinator = rt.client().unwrap();
            let actors = extended_election(&coordinator, n, &mut Rng::seeded(seed), WAIT).unwrap();
            let channels =
                bench_channels(exec.handle(), n, &mut Rng::seeded(seed), None, WAIT).unwrap();
            assert_eq!(
                actors.winner_index(),
                channels.winner_index(),
                "n {n}, seed {seed}"
            );
            // Same ranks at every position, so the same amount of traffic
            // apart from the actors' Init round.
            assert_eq!(
                common::ranks_of(&actors.ring),
                common::ranks_of(&channels.ring)
            );
            assert_eq!(rt.envelopes_sent(), channels.writes + n as u64);
        }
    }
}
