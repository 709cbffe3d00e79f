use std::error::Error;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::Parser;
use ringleader::bench::{self, BenchConfig, BenchError, Mode};

/// Times ring leader elections: actors, channels, or the spawn-and-stop
/// control.
#[derive(Debug, Parser)]
#[command(name = "ringleader", version)]
struct Args {
    /// What to run. `heat` runs control, actors, and channels in turn.
    #[arg(
        long,
        env = "MODE",
        default_value = "actors",
        value_parser = PossibleValuesParser::new(["actors", "channels", "control", "heat"])
            .map(|s| s.parse::<Mode>().expect("listed modes parse")),
    )]
    mode: Mode,

    /// Nodes in the ring.
    #[arg(long, env = "RING_SIZE", default_value_t = 4)]
    ring_size: usize,

    /// Ring-order seed. Random when omitted; the seed used is in the output.
    #[arg(long)]
    seed: Option<u64>,

    /// Measured repetitions per mode.
    #[arg(long, default_value_t = 5)]
    reps: usize,

    /// Unmeasured runs per mode before the repetitions.
    #[arg(long, default_value_t = 1)]
    warmups: usize,

    /// Print every send and election event to stdout.
    #[arg(long)]
    trace: bool,

    /// Write per-repetition rows as CSV. `-` means stdout.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Seconds to wait for a single run before giving up.
    #[arg(long, default_value_t = 30)]
    timeout: u64,

    /// Executor threads. Defaults to the available parallelism, at least 2.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = BenchConfig {
        mode: args.mode,
        ring_size: args.ring_size,
        seed: args.seed,
        repetitions: args.reps,
        warmups: args.warmups,
        trace: args.trace,
        timeout: Duration::from_secs(args.timeout),
        workers: args.workers,
    };
    if let Err(err) = config.validate() {
        eprintln!("error: {err}");
        return ExitCode::from(2);
    }
    let rows = match bench::run(&config) {
        Ok(rows) => rows,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(match err {
                BenchError::InvalidRingSize { .. } => 2,
                _ => 1,
            });
        }
    };
    if let Err(err) = report(&args, &rows) {
        eprintln!("error: {err}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn report(args: &Args, rows: &[bench::BenchResult]) -> Result<(), Box<dyn Error>> {
    let to_stdout = args.csv.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        let mut stdout = io::stdout().lock();
        if let Some(row) = rows.first() {
            writeln!(stdout, "seed {}", row.seed)?;
        }
        write!(stdout, "{}", bench::render_table(rows))?;
    }
    match &args.csv {
        None => Ok(()),
        Some(_) if to_stdout => Ok(bench::write_csv(rows, io::stdout().lock())?),
        Some(path) => Ok(bench::write_csv(rows, File::create(path)?)?),
    }
}
