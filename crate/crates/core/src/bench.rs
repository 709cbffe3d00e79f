//! Timed election runs: the control (spawn and stop only), the actor ring,
//! and the channel ring.
//!
//! Each run gets a fresh executor, built before the clock starts. A run
//! ends once the confirmed winner is known, every message has been
//! processed, and the nodes are gone. Every timed run still checks that the
//! greatest node won.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::actor::{
    default_workers, Context, Envelope, Runtime, RuntimeError, StdoutSink, TraceSink,
};
use crate::channels::{bench_channels, ChannelError};
use crate::election::ElectionError;
use crate::exnode::extended_election;
use crate::permute::{entropy_seed, Rng};
use crate::AnyMessage;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// What the command line asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Actors,
    Channels,
    Control,
    /// All three, one after another.
    Heat,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "actors" => Ok(Mode::Actors),
            "channels" => Ok(Mode::Channels),
            "control" => Ok(Mode::Control),
            "heat" => Ok(Mode::Heat),
            other => Err(format!(
                "unknown mode {other:?}, expected actors, channels, control or heat"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Actors => "actors",
            Mode::Channels => "channels",
            Mode::Control => "control",
            Mode::Heat => "heat",
        })
    }
}

/// A single kind of timed run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Control,
    Actors,
    Channels,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Control, Kind::Actors, Kind::Channels];

    fn min_ring(self) -> usize {
        match self {
            Kind::Control => 0,
            Kind::Actors | Kind::Channels => 2,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Control => "control",
            Kind::Actors => "actors",
            Kind::Channels => "channels",
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub mode: Mode,
    pub ring_size: usize,
    /// Ring-order seed; drawn from entropy when absent.
    pub seed: Option<u64>,
    pub repetitions: usize,
    /// Untimed runs before the measured ones, per kind.
    pub warmups: usize,
    pub trace: bool,
    pub timeout: Duration,
    pub workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            mode: Mode::Actors,
            ring_size: 4,
            seed: None,
            repetitions: 5,
            warmups: 1,
            trace: false,
            timeout: DEFAULT_TIMEOUT,
            workers: None,
        }
    }
}

impl BenchConfig {
    pub fn kinds(&self) -> Vec<Kind> {
        match self.mode {
            Mode::Actors => vec![Kind::Actors],
            Mode::Channels => vec![Kind::Channels],
            Mode::Control => vec![Kind::Control],
            Mode::Heat => Kind::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        for kind in self.kinds() {
            if self.ring_size < kind.min_ring() {
                return Err(BenchError::InvalidRingSize {
                    kind,
                    ring_size: self.ring_size,
                });
            }
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchResult {
    pub mode: Kind,
    pub ring_size: usize,
    pub seed: u64,
    pub rep: usize,
    pub wall_ns: u64,
    /// Envelopes sent (actors) or channel writes (channels).
    pub messages: u64,
    pub winner_ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sample {
    pub wall: Duration,
    pub messages: u64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{kind} needs a ring size of at least {}, got {ring_size}", kind.min_ring())]
    InvalidRingSize { kind: Kind, ring_size: usize },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{kind}: the confirmed winner is not the greatest node")]
    WrongWinner { kind: Kind },
    #[error("{kind}: nodes did not halt within {timeout:?}")]
    Teardown { kind: Kind, timeout: Duration },
    #[error("could not start an executor: {0}")]
    Executor(io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Per-run knobs shared by every kind.
#[derive(Clone)]
pub struct RunOptions {
    pub trace: Option<Arc<dyn TraceSink>>,
    pub timeout: Duration,
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trace: None,
            timeout: DEFAULT_TIMEOUT,
            workers: None,
        }
    }
}

impl RunOptions {
    fn runtime(&self) -> Result<Runtime, BenchError> {
        let mut builder = Runtime::builder();
        if let Some(workers) = self.workers {
            builder = builder.worker_threads(workers);
        }
        if let Some(sink) = &self.trace {
            builder = builder.trace(Arc::clone(sink));
        }
        Ok(builder.build()?)
    }
}

/// Spawns `n` actors that do nothing and stops them again.
pub fn bench_control(n: usize, opts: &RunOptions) -> Result<Sample, BenchError> {
    let rt = opts.runtime()?;
    let start = Instant::now();
    let ids = (0..n)
        .map(|_| rt.spawn(|s: (), _: Envelope<AnyMessage>, _: &mut Context| Ok(s), ()))
        .collect::<Result<Vec<_>, _>>()?;
    for id in ids {
        rt.stop(id)?;
    }
    if !rt.wait_idle(opts.timeout) {
        return Err(BenchError::Teardown {
            kind: Kind::Control,
            timeout: opts.timeout,
        });
    }
    Ok(Sample {
        wall: start.elapsed(),
        messages: rt.envelopes_sent(),
    })
}

/// One extended election over actors.
pub fn bench_actors(n: usize, seed: u64, opts: &RunOptions) -> Result<Sample, BenchError> {
    let rt = opts.runtime()?;
    let coordinator = rt.client()?;
    let mut rng = Rng::seeded(seed);
    let start = Instant::now();
    let outcome = extended_election(&coordinator, n, &mut rng, opts.timeout)?;
    if !rt.wait_idle(opts.timeout) {
        return Err(BenchError::Teardown {
            kind: Kind::Actors,
            timeout: opts.timeout,
        });
    }
    let wall = start.elapsed();
    if !outcome.winner_is_greatest() {
        return Err(BenchError::WrongWinner { kind: Kind::Actors });
    }
    Ok(Sample {
        wall,
        messages: rt.envelopes_sent(),
    })
}

/// One extended election over channels.
pub fn bench_channel_ring(n: usize, seed: u64, opts: &RunOptions) -> Result<Sample, BenchError> {
    let executor = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(opts.workers.unwrap_or_else(default_workers))
        .build()
        .map_err(BenchError::Executor)?;
    let mut rng = Rng::seeded(seed);
    let start = Instant::now();
    // Checks the winner itself and stops every node before returning.
    let outcome = bench_channels(
        executor.handle(),
        n,
        &mut rng,
        opts.trace.clone(),
        opts.timeout,
    )?;
    Ok(Sample {
        wall: start.elapsed(),
        messages: outcome.writes,
    })
}

pub fn run_once(kind: Kind, n: usize, seed: u64, opts: &RunOptions) -> Result<Sample, BenchError> {
    match kind {
        Kind::Control => bench_control(n, opts),
        Kind::Actors => bench_actors(n, seed, opts),
        Kind::Channels => bench_channel_ring(n, seed, opts),
    }
}

/// Warmups, then `reps` measured runs of one kind.
pub fn bench_kind(
    kind: Kind,
    n: usize,
    seed: u64,
    reps: usize,
    warmups: usize,
    opts: &RunOptions,
) -> Result<Vec<BenchResult>, BenchError> {
    if n < kind.min_ring() {
        return Err(BenchError::InvalidRingSize { kind, ring_size: n });
    }
    for _ in 0..warmups {
        run_once(kind, n, seed, opts)?;
    }
    (0..reps)
        .map(|rep| {
            let sample = run_once(kind, n, seed, opts)?;
            Ok(BenchResult {
                mode: kind,
                ring_size: n,
                seed,
                rep,
                wall_ns: u64::try_from(sample.wall.as_nanos()).unwrap_or(u64::MAX),
                messages: sample.messages,
                winner_ok: true,
            })
        })
        .collect()
}

/// Control, actors, then channels at one ring size.
pub fn bench_heat(
    n: usize,
    seed: u64,
    reps: usize,
    warmups: usize,
    opts: &RunOptions,
) -> Result<Vec<BenchResult>, BenchError> {
    let mut rows = Vec::with_capacity(3 * reps);
    for kind in Kind::ALL {
        rows.extend(bench_kind(kind, n, seed, reps, warmups, opts)?);
    }
    Ok(rows)
}

/// Runs whatever `config` asks for. Trace lines, if enabled, go to stdout.
pub fn run(config: &BenchConfig) -> Result<Vec<BenchResult>, BenchError> {
    config.validate()?;
    let seed = config.seed.unwrap_or_else(entropy_seed);
    let opts = RunOptions {
        trace: config
            .trace
            .then(|| Arc::new(StdoutSink) as Arc<dyn TraceSink>),
        timeout: config.timeout,
        workers: config.workers,
    };
    let mut rows = Vec::new();
    for kind in config.kinds() {
        rows.extend(bench_kind(
            kind,
            config.ring_size,
            seed,
            config.repetitions,
            config.warmups,
            &opts,
        )?);
    }
    Ok(rows)
}

pub fn median(samples: &mut [Duration]) -> Option<Duration> {
    if samples.is_empty() {
        return None;
    }
    samples.sort_unstable();
    let mid = samples.len() / 2;
    Some(if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    })
}

pub fn write_csv<W: io::Write>(rows: &[BenchResult], out: W) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record([
            "mode",
            "ring_size",
            "seed",
            "rep",
            "wall_ns",
            "messages",
            "winner_ok",
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// A per-kind summary table: medians, spread, and message counts.
pub fn render_table(rows: &[BenchResult]) -> String {
    let mut out = format!(
        "{:<9} {:>9} {:>5} {:>12} {:>12} {:>12} {:>10}\n",
        "mode", "ring", "reps", "median_ms", "min_ms", "max_ms", "messages"
    );
    for kind in Kind::ALL {
        let group: Vec<&BenchResult> = rows.iter().filter(|r| r.mode == kind).collect();
        let Some(first) = group.first() else { continue };
        let mut walls: Vec<Duration> = group
            .iter()
            .map(|r| Duration::from_nanos(r.wall_ns))
            .collect();
        let med = median(&mut walls).unwrap_or_default();
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let mut messages: Vec<u64> = group.iter().map(|r| r.messages).collect();
        messages.sort_unstable();
        messages.dedup();
        let messages = match messages.as_slice() {
            [one] => one.to_string(),
            many => format!("{}..{}", many[0], many[many.len() - 1]),
        };
        out.push_str(&format!(
            "{:<9} {:>9} {:>5} {:>12.3} {:>12.3} {:>12.3} {:>10}\n",
            kind.to_string(),
            first.ring_size,
            group.len(),
            ms(med),
            ms(walls[0]),
            ms(walls[walls.len() - 1]),
            messages
        ));
    }
    out
}
