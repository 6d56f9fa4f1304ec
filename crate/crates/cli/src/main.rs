//! `oramlab` command-line driver.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oramlab::adversary::{
    alice_encode, bob_decode, dense_partition_frequency_on, estimate_advantage, random_payload,
    CodecContext, FrequencyWorkload,
};
use oramlab::report::analyze_trace;
use oramlab::{
    build_access_graph, EngineKind, Error, OramConfig, Rational, TraceFile, WorkloadSpec,
};

const EXIT_USAGE: u8 = 1;
const EXIT_MODEL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "oramlab",
    version,
    about = "Access-pattern experiments on online ORAM engines"
)]
struct Cli {
    /// Base seed for every randomized step
    #[arg(long, global = true, env = "ORAMLAB_SEED")]
    seed: Option<u64>,

    /// Worker threads for independent trials
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an engine on a workload and write the trace file
    Trace {
        #[command(flatten)]
        engine: EngineArgs,
        /// alt:n=<N> or blocks:n=<N>,k=<K>,seed=<S>
        #[arg(long)]
        workload: WorkloadSpec,
        /// Emit `#op <index>` lines before each operation's probes
        #[arg(long)]
        with_boundaries: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Certify a probe lower bound for a trace file
    Analyze {
        trace: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Estimate the distinguisher's advantage between two workloads
    Distinguish {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        y: WorkloadSpec,
        #[arg(long)]
        yprime: WorkloadSpec,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Fraction of block-workload runs whose trace has a dense partition
    Frequency {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Feed the alternating workload instead of blocks
        #[arg(long)]
        alternating: bool,
    },
    /// Run the block transfer protocol once and check the round trip
    Codec {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        k: usize,
        /// 1-based block index
        #[arg(long)]
        i: usize,
    },
    /// Simulate and analyze in one step
    Report {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        workload: WorkloadSpec,
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Write the access graph of a trace file
    GraphExport {
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct EngineArgs {
    /// passthrough | linear-scan | tree | dummy-encoder | dummy-leaker
    #[arg(long)]
    engine: EngineKind,
    /// Operation count; required by dummy-leaker, otherwise taken from the workload
    #[arg(long)]
    n: Option<usize>,
    /// Client memory cells
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Logical address range (defaults to n)
    #[arg(long = "M", alias = "address-range")]
    address_range: Option<u64>,
    /// Cell width in bits
    #[arg(long, default_value_t = 32)]
    w: u32,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Density parameter, integer or p/q (defaults to floor(n/5))
    #[arg(long)]
    ell: Option<String>,
    /// Largest block count to certify (defaults to the workload's admissible maximum)
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Dot,
    Edges,
}

enum Failure {
    Usage(String),
    Model(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Model(_)
            | Error::AddressOutOfRange { .. }
            | Error::DataTooWide { .. }
            | Error::StashOverflow { .. }
            | Error::Decode(_)
            | Error::Certificate(_) => Failure::Model(e.to_string()),
            Error::TraceFormat(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

impl EngineArgs {
    /// Config for a workload of `len` operations, checking `--n` against it.
    fn config(&self, len: Option<usize>) -> Result<(OramConfig, usize), Failure> {
        let n = match (self.n, len) {
            (Some(a), Some(b)) if a != b => {
                return Err(Failure::Usage(format!(
                    "--n {a} disagrees with workload length {b}"
                )))
            }
            (None, _) if self.engine.requires_length() => {
                return Err(Failure::Usage(format!(
                    "--n is required for {}",
                    self.engine
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(Failure::Usage("--n is required".into())),
        };
        let range = self.address_range.unwrap_or(n.max(1) as u64);
        Ok((OramConfig::new(self.m, range, self.w)?, n))
    }
}

fn seed_for(cli_seed: Option<u64>, engine: EngineKind) -> Result<u64, Failure> {
    match cli_seed {
        Some(s) => Ok(s),
        None if engine.is_randomized() => Err(Failure::Usage(format!(
            "{engine} is randomized: pass --seed or set ORAMLAB_SEED"
        ))),
        None => Ok(0),
    }
}

fn parse_ell(s: &Option<String>) -> Result<Option<Rational>, Failure> {
    let Some(s) = s else { return Ok(None) };
    let bad = || Failure::Usage(format!("bad --ell {s:?}: expected an integer or p/q"));
    let r = match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i64, i64) = (
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            );
            if q == 0 {
                return Err(bad());
            }
            Rational::new(p, q)
        }
        None => Rational::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    Ok(Some(r))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn emit_json<T: Serialize>(value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    emit(&None, &text)
}

fn read_trace(path: &Path) -> Result<TraceFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(TraceFile::parse(&text)?)
}

fn simulate(
    engine: &EngineArgs,
    workload: &WorkloadSpec,
    seed: Option<u64>,
    bounds: bool,
) -> Result<TraceFile, Failure> {
    let (cfg, _) = engine.config(Some(workload.len()))?;
    let seed = seed_for(seed, engine.engine)?;
    Ok(TraceFile::simulate(
        engine.engine,
        &cfg,
        workload,
        seed,
        bounds,
    )?)
}

#[derive(Serialize)]
struct CodecReport {
    engine: EngineKind,
    n: usize,
    k: usize,
    i: usize,
    seed: u64,
    snapshot_cells: usize,
    matched_probes: usize,
    bit_length: u64,
    payload_bits: u64,
    round_trip: bool,
}

fn run(cli: Cli) -> Outcome {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Trace {
            engine,
            workload,
            with_boundaries,
            out,
        } => {
            let file = simulate(&engine, &workload, cli.seed, with_boundaries)?;
            emit(&out, &file.to_text())
        }
        Command::Analyze {
            trace,
            bound,
            format,
            out,
        } => {
            let file = read_trace(&trace)?;
            let report = analyze_trace(&file, parse_ell(&bound.ell)?, bound.k_max)?;
            let text = match format {
                Format::Csv => report.to_csv(),
                Format::Json => {
                    serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?
                        + "\n"
                }
            };
            emit(&out, &text)
        }
        Command::Distinguish {
            engine,
            y,
            yprime,
            trials,
        } => {
            if y.len() != yprime.len() {
                return Err(Failure::Usage(format!(
                    "--y has {} operations, --yprime has {}",
                    y.len(),
                    yprime.len()
                )));
            }
            let (cfg, _) = engine.config(Some(y.len()))?;
            let seed = seed_for(cli.seed, engine.engine)?;
            let (ys, _) = y.generate(cfg.w)?;
            let (yps, _) = yprime.generate(cfg.w)?;
            emit_json(&estimate_advantage(
                engine.engine,
                &cfg,
                &ys,
                &yps,
                trials,
                seed,
            )?)
        }
        Command::Frequency {
            engine,
            k,
            trials,
            alternating,
        } => {
            let (cfg, n) = engine.config(None)?;
            let seed = seed_for(cli.seed, engine.engine)?;
            let workload = if alternating {
                FrequencyWorkload::Alternating
            } else {
                FrequencyWorkload::Blocks
            };
            emit_json(&dense_partition_frequency_on(
                engine.engine,
                &cfg,
                workload,
                n,
                k,
                trials,
                seed,
            )?)
        }
        Command::Codec { engine, k, i } => {
            let (cfg, n) = engine.config(None)?;
            let seed = seed_for(cli.seed, engine.engine)?;
            let ctx = CodecContext::random(engine.engine, cfg, n, k, seed)?;
            let b = random_payload(&ctx, seed);
            let msg = alice_encode(&ctx, i, &b)?.with_checksum(&b);
            let decoded = bob_decode(&ctx, i, &msg)?;
            emit_json(&CodecReport {
                engine: engine.engine,
                n,
                k,
                i,
                seed,
                snapshot_cells: msg.client_mem_snapshot.len(),
                matched_probes: msg.matched_probes.len(),
                bit_length: msg.bit_length(),
                payload_bits: cfg.w as u64 * ctx.ell() as u64,
                round_trip: decoded == b,
            })
        }
        Command::Report {
            engine,
            workload,
            bound,
            format,
        } => {
            let file = simulate(&engine, &workload, cli.seed, false)?;
            let report = analyze_trace(&file, parse_ell(&bound.ell)?, bound.k_max)?;
            match format {
                Format::Csv => emit(&None, &report.to_csv()),
                Format::Json => emit_json(&report),
            }
        }
        Command::GraphExport { trace, format, out } => {
            let file = read_trace(&trace)?;
            let g = build_access_graph(&file.trace)?;
            let text = match format {
                GraphFormat::Dot => g.to_dot(),
                GraphFormat::Edges => g.to_edge_list(),
            };
            emit(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Model(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_MODEL)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
