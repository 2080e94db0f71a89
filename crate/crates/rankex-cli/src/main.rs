//! Command-line driver: ranked enumeration, delay benchmarking, unambiguity
//! validation, and n-sum sorting.
//!
//! Exit codes: 0 success, 2 parse error (files, formats, symbols), 3
//! validation failure (ambiguity witness found). Every flag can also be set
//! through an environment variable with the `RANKEX_` prefix.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rankex::enumerate::{enumerate_transducer, prepare, Algorithm, OutputStream, PreparedQuery};
use rankex::group::{CmpCounter, GeneratorBasis, GroupElement, IntVec, NSum};
use rankex::nsum::{sort_nsums, Backend, SortOptions};
use rankex::transducer::{
    check_unambiguous, load_transducer, AnyTransducer, CostTransducer, Document, GroupSpec,
    SerialWeight,
};
use rankex::Error;

#[derive(Parser)]
#[command(name = "rankex", version, about = "Ranked enumeration for weighted annotation transducers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream ranked output tuples for a transducer over a document.
    Enumerate(EnumerateArgs),
    /// Measure per-output delay and instrumentation counters.
    Bench(EnumerateArgs),
    /// Search for an ambiguity witness up to a document length.
    Validate(ValidateArgs),
    /// Sort a file of n-sum coefficient vectors.
    Sort(SortArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Simple,
    Epoch,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ndjson,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Baseline,
    Radix,
    Rounding,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Transducer description (JSON).
    #[arg(long, env = "RANKEX_TRANSDUCER")]
    transducer: PathBuf,
    /// UTF-8 document; one trailing newline is ignored.
    #[arg(long, env = "RANKEX_DOC")]
    doc: PathBuf,
    #[arg(long, env = "RANKEX_ALGO", value_enum, default_value_t = AlgoArg::Simple)]
    algo: AlgoArg,
    /// Emit at most this many results (the bounded-enumeration cutoff).
    #[arg(long, env = "RANKEX_LIMIT")]
    limit: Option<u64>,
    #[arg(long, env = "RANKEX_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "RANKEX_FORMAT", value_enum, default_value_t = FormatArg::Ndjson)]
    format: FormatArg,
    /// Report enumerator counters on stderr when done.
    #[arg(long, env = "RANKEX_INSTRUMENT")]
    instrument: bool,
    /// Write the pruned product DAG in GraphViz format to this path.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, env = "RANKEX_TRANSDUCER")]
    transducer: PathBuf,
    /// Documents up to this length are covered by the witness search.
    #[arg(long, env = "RANKEX_MAX_LEN", default_value_t = 8)]
    max_len: usize,
}

#[derive(Args)]
struct SortArgs {
    /// Sort input (JSON): group, bound, basis, coefficient vectors.
    #[arg(long, env = "RANKEX_INPUT")]
    input: PathBuf,
    #[arg(long, env = "RANKEX_BACKEND", value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
    #[arg(long, env = "RANKEX_SEED", default_value_t = 0)]
    seed: u64,
    /// Report comparisons, attempts and the backend used on stderr.
    #[arg(long, env = "RANKEX_INSTRUMENT")]
    instrument: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    };
    std::process::exit(code);
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse(_)) | Some(Error::Io(_)) => 2,
        Some(Error::Validation(_)) | Some(Error::Ambiguous { .. }) => 3,
        Some(_) => 1,
        None => {
            if err.downcast_ref::<std::io::Error>().is_some()
                || err.downcast_ref::<serde_json::Error>().is_some()
            {
                2
            } else {
                1
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Enumerate(args) => with_transducer(&args.transducer, |t, ctx| {
            cmd_enumerate(t, ctx, &args, false)
        }),
        Command::Bench(args) => with_transducer(&args.transducer, |t, ctx| {
            cmd_enumerate(t, ctx, &args, true)
        }),
        Command::Validate(args) => {
            with_transducer(&args.transducer, |t, _ctx| cmd_validate(t, &args))
        }
        Command::Sort(args) => cmd_sort(&args),
    }
}

fn with_transducer<F>(path: &Path, f: F) -> anyhow::Result<()>
where
    F: FnOnce(&dyn TransducerOps, usize) -> anyhow::Result<()>,
{
    let json = std::fs::read_to_string(path)
        .map_err(|e| anyhow::Error::new(Error::Parse(format!("{}: {e}", path.display()))))?;
    match load_transducer(&json)? {
        AnyTransducer::Int(t) => f(&t, 0),
        AnyTransducer::IntVec(t, len) => f(&t, len),
    }
}

/// Group-erased view of the loaded transducer; each weight type drives the
/// same command bodies.
trait TransducerOps {
    fn enumerate(&self, ctx: usize, args: &EnumerateArgs, bench: bool) -> anyhow::Result<()>;
    fn validate(&self, max_len: usize) -> anyhow::Result<()>;
}

impl<W: GroupElement + SerialWeight> TransducerOps for CostTransducer<W> {
    fn enumerate(&self, ctx: usize, args: &EnumerateArgs, bench: bool) -> anyhow::Result<()> {
        let doc = load_document(&args.doc)?;
        self.check_document(&doc)?;
        let started = Instant::now();
        let query: PreparedQuery<W> = prepare(self, &doc)?;
        let preprocessing = started.elapsed();
        if let Some(dot) = &args.dot {
            std::fs::write(dot, query.heap().graph().to_dot(|m| self.marker_name(m).to_string()))?;
        }
        let algo = match args.algo {
            AlgoArg::Simple => Algorithm::Simple,
            AlgoArg::Epoch => Algorithm::Epoch,
        };
        let limit = args.limit.unwrap_or(u64::MAX);
        let stream = enumerate_transducer(&query, algo, limit, args.seed)?;
        let stdout = std::io::stdout();
        let mut out = std::io::BufWriter::new(stdout.lock());
        if bench {
            eprintln!("preprocessing_ns={}", preprocessing.as_nanos());
            writeln!(out, "rank,len,delay_ns,aux_or_epoch")?;
            run_bench_rows(stream, algo, &mut out)?;
        } else {
            let emitted = write_outputs(self, ctx, stream, args, &mut out)?;
            if args.instrument {
                eprintln!("emitted={emitted}");
            }
        }
        out.flush()?;
        Ok(())
    }

    fn validate(&self, max_len: usize) -> anyhow::Result<()> {
        match check_unambiguous(self, max_len)? {
            Ok(()) => {
                println!("unambiguous up to length {max_len}");
                Ok(())
            }
            Err(witness) => {
                println!("ambiguous on {:?}", witness.document);
                println!("run1 transitions: {:?}", witness.run1);
                println!("run2 transitions: {:?}", witness.run2);
                Err(Error::Validation(format!(
                    "two accepting runs share the output on {:?}",
                    witness.document
                ))
                .into())
            }
        }
    }
}

fn run_bench_rows<W: GroupElement>(
    mut stream: OutputStream<'_, W>,
    algo: Algorithm,
    out: &mut impl std::io::Write,
) -> anyhow::Result<()> {
    let mut last = Instant::now();
    while let Some(item) = stream.next() {
        let delay = last.elapsed().as_nanos();
        last = Instant::now();
        let stats = stream.stats();
        let gauge = match algo {
            Algorithm::Simple => stats.aux_size as u64,
            Algorithm::Epoch => u64::from(stats.epoch),
        };
        writeln!(out, "{},{},{delay},{gauge}", item.rank, item.items.len())?;
    }
    Ok(())
}

fn write_outputs<W: GroupElement + SerialWeight>(
    t: &CostTransducer<W>,
    ctx: usize,
    stream: OutputStream<'_, W>,
    args: &EnumerateArgs,
    out: &mut impl std::io::Write,
) -> anyhow::Result<u64> {
    let mut emitted = 0;
    match args.format {
        FormatArg::Ndjson => {
            for item in stream {
                let tuple: Vec<serde_json::Value> = item
                    .items
                    .iter()
                    .map(|&(m, p)| serde_json::json!([t.marker_name(m), p]))
                    .collect();
                let line = serde_json::json!({
                    "rank": item.rank,
                    "weight": item.weight.to_json(ctx),
                    "tuple": tuple,
                });
                writeln!(out, "{line}")?;
                emitted += 1;
            }
        }
        FormatArg::Csv => {
            writeln!(out, "rank,weight,tuple")?;
            for item in stream {
                let mut tuple = String::new();
                for (i, &(m, p)) in item.items.iter().enumerate() {
                    if i > 0 {
                        tuple.push(';');
                    }
                    let _ = write!(tuple, "{}@{p}", t.marker_name(m));
                }
                writeln!(out, "{},{},{tuple}", item.rank, weight_csv(&item.weight, ctx))?;
                emitted += 1;
            }
        }
    }
    Ok(emitted)
}

fn weight_csv<W: SerialWeight + GroupElement>(w: &W, ctx: usize) -> String {
    match w.to_json(ctx) {
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::Array(parts) => parts
            .into_iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("|"),
        other => other.to_string(),
    }
}

fn cmd_enumerate(
    t: &dyn TransducerOps,
    ctx: usize,
    args: &EnumerateArgs,
    bench: bool,
) -> anyhow::Result<()> {
    t.enumerate(ctx, args, bench)
}

fn cmd_validate(t: &dyn TransducerOps, args: &ValidateArgs) -> anyhow::Result<()> {
    t.validate(args.max_len)
}

fn load_document(path: &Path) -> anyhow::Result<Document> {
    let mut text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::Error::new(Error::Parse(format!("{}: {e}", path.display()))))?;
    if text.ends_with('\n') {
        text.pop();
        if text.ends_with('\r') {
            text.pop();
        }
    }
    Ok(Document::new(&text))
}

// --- sort subcommand -------------------------------------------------------

#[derive(serde::Deserialize)]
struct SortFile {
    group: GroupSpec,
    n: u32,
    basis: Vec<serde_json::Value>,
    sums: Vec<Vec<u32>>,
}

fn cmd_sort(args: &SortArgs) -> anyhow::Result<()> {
    let json = std::fs::read_to_string(&args.input)
        .map_err(|e| anyhow::Error::new(Error::Parse(format!("{}: {e}", args.input.display()))))?;
    let file: SortFile =
        serde_json::from_str(&json).map_err(|e| anyhow::Error::new(Error::Parse(e.to_string())))?;
    let backend = match args.backend {
        BackendArg::Auto => Backend::Auto,
        BackendArg::Baseline => Backend::Baseline,
        BackendArg::Radix => Backend::Radix,
        BackendArg::Rounding => Backend::Rounding,
    };
    let opts = SortOptions { backend, seed: args.seed, ..SortOptions::default() };
    let sums: Vec<NSum> = file.sums.iter().map(|c| NSum::new(c.clone())).collect();
    let counter = CmpCounter::new();
    let outcome = match file.group {
        GroupSpec::Int => {
            let gens: Vec<i64> = file
                .basis
                .iter()
                .map(|v| {
                    v.as_i64().ok_or_else(|| {
                        anyhow::Error::new(Error::Parse("basis entries must be integers".into()))
                    })
                })
                .collect::<anyhow::Result<_>>()?;
            sort_nsums(&sums, &GeneratorBasis::new(gens)?, file.n, &opts, &counter)?
        }
        GroupSpec::IntVec { len } => {
            let gens: Vec<IntVec> = file
                .basis
                .iter()
                .map(|v| {
                    let arr = v.as_array().ok_or_else(|| {
                        anyhow::Error::new(Error::Parse(
                            "basis entries must be integer arrays".into(),
                        ))
                    })?;
                    if arr.len() != len {
                        return Err(anyhow::Error::new(Error::Parse(format!(
                            "basis entry has {} coordinates, group declares {len}",
                            arr.len()
                        ))));
                    }
                    let coords = arr
                        .iter()
                        .map(|x| {
                            x.as_i64().ok_or_else(|| {
                                anyhow::Error::new(Error::Parse(
                                    "basis coordinates must be integers".into(),
                                ))
                            })
                        })
                        .collect::<anyhow::Result<Vec<i64>>>()?;
                    Ok(IntVec::new(coords))
                })
                .collect::<anyhow::Result<_>>()?;
            sort_nsums(&sums, &GeneratorBasis::new(gens)?, file.n, &opts, &counter)?
        }
    };
    println!("{}", serde_json::to_string(&outcome.permutation)?);
    if args.instrument {
        let r = &outcome.report;
        eprintln!(
            "backend={:?} comparisons={} attempts={} fallback={:?} buckets={} small_input={}",
            r.used, r.comparisons, r.attempts, r.fallback, r.buckets, r.small_input
        );
    }
    Ok(())
}
