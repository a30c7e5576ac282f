use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bitopt_core::distinct::distinct_eval;
use bitopt_core::exec::{execute, ExecOptions, ResultSet};
use bitopt_core::explain::explain;
use bitopt_core::oracle::oracle_eval;
use bitopt_core::store::read_ntriples;
use bitopt_core::{parse, Error, Query, Store};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bitopt", version, about = "BitMat RDF store with a pruning SPARQL OPTIONAL engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load an N-Triples file into a store directory.
    /// Arguments: `[DIR] FILE`; DIR defaults to $BITOPT_STORE.
    Load {
        #[arg(num_args = 1..=2, required = true, value_names = ["DIR", "FILE"])]
        paths: Vec<PathBuf>,
        /// Overwrite a store that already exists in the directory.
        #[arg(long)]
        force: bool,
    },
    /// Run a query file against a store and print TSV.
    Query(QueryArgs),
}

#[derive(Args)]
struct QueryArgs {
    /// `[DIR] QUERY`; DIR defaults to $BITOPT_STORE.
    #[arg(num_args = 1..=2, required = true, value_names = ["DIR", "QUERY"])]
    paths: Vec<PathBuf>,
    /// Print the plan report to stderr.
    #[arg(long)]
    explain: bool,
    /// Evaluate with the reference nested-loop evaluator.
    #[arg(long, conflicts_with_all = ["no_prune", "unsafe_order"])]
    oracle: bool,
    #[arg(long)]
    no_prune: bool,
    /// Join in textual order with per-pattern null-extension and no best-match.
    #[arg(long, requires = "no_prune")]
    unsafe_order: bool,
    /// With --unsafe-order, nullify each row.
    #[arg(long, requires = "unsafe_order")]
    nullify: bool,
}

const EXIT_IO: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_REJECTED: u8 = 4;
const EXIT_INTERNAL: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Load { paths, force } => store_and_file(&paths).and_then(|(dir, file)| cmd_load(&dir, &file, force)),
        Command::Query(args) => store_and_file(&args.paths).and_then(|(dir, q)| cmd_query(&dir, &q, &args)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bitopt: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Splits `[DIR] FILE`, taking DIR from $BITOPT_STORE when omitted.
fn store_and_file(paths: &[PathBuf]) -> Result<(PathBuf, PathBuf), Error> {
    match paths {
        [dir, file] => Ok((dir.clone(), file.clone())),
        [file] => match std::env::var_os("BITOPT_STORE") {
            Some(dir) => Ok((PathBuf::from(dir), file.clone())),
            None => Err(Error::Io(io::Error::new(
                io::ErrorKind::NotFound,
                "no store directory given and BITOPT_STORE is not set",
            ))),
        },
        _ => unreachable!("clap enforces one or two paths"),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::NTriples { .. } | Error::Format(_) => EXIT_IO,
        Error::UnsupportedByIndex(_) | Error::OracleLimit(_) => EXIT_UNSUPPORTED,
        e if e.is_rejection() => EXIT_REJECTED,
        _ => EXIT_INTERNAL,
    }
}

fn cmd_load(dir: &Path, file: &Path, force: bool) -> Result<(), Error> {
    let triples = read_ntriples(BufReader::new(fs::File::open(file)?))?;
    if Store::exists_in(dir) && !force {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("{} already holds a store; pass --force to replace it", dir.display()),
        )));
    }
    let store = Store::from_triples(&triples)?;
    store.save(dir)?;
    println!("{} triples, {} predicates", store.triple_count(), store.dictionary().num_predicates());
    Ok(())
}

fn cmd_query(dir: &Path, query: &Path, args: &QueryArgs) -> Result<(), Error> {
    let text = fs::read_to_string(query)?;
    let store = Store::open(dir)?;
    let q = parse(&text)?;
    let started = Instant::now();
    let result = if args.oracle {
        let triples: Vec<_> = store.triples().collect();
        oracle_eval(&q, &triples)?
    } else {
        let opts = ExecOptions {
            no_prune: args.no_prune,
            unsafe_order: args.unsafe_order,
            nullify: args.nullify,
            ..ExecOptions::default()
        };
        engine(&q, &store, &opts, args.explain)?
    };
    if args.explain {
        eprintln!("elapsed_ms={}", started.elapsed().as_millis());
    }
    let mut stdout = io::stdout().lock();
    stdout.write_all(result.sorted().to_tsv().as_bytes())?;
    Ok(())
}

fn engine(q: &Query, store: &Store, opts: &ExecOptions, show: bool) -> Result<ResultSet, Error> {
    let plain = Query::new(q.projection.clone(), false, q.root.clone());
    let debug = opts.no_prune || opts.unsafe_order;
    let run = if show || !q.distinct || debug { Some(execute(&plain, store, opts)?) } else { None };
    let distinct = if q.distinct && !debug { Some(distinct_eval(q, store)?) } else { None };
    if show {
        eprint!("{}", explain(q, run.as_ref().expect("run computed for explain"), distinct.as_ref()));
    }
    Ok(match (distinct, run) {
        (Some(d), _) => d.result,
        (None, Some(r)) if q.distinct => {
            let mut rs = r.result.sorted();
            rs.rows.dedup();
            rs
        }
        (None, Some(r)) => r.result,
        (None, None) => unreachable!("one evaluation always runs"),
    })
}
