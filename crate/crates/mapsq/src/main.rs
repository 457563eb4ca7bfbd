//! Command-line front end: answer queries over N-Triples files, benchmark
//! the two join engines against each other, and generate synthetic data.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 engine disagreement
//! during a benchmark.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use mapsq::bench::{run_bench, BenchError};
use mapsq::generator::{generate, GenConfig};
use mapsq::oracle::evaluate_bruteforce;
use mapsq::planner::{execute_with, plan_bgp, JoinEngine, ResultSet};
use mapsq::sparql::{parse_query, Query};
use mapsq::store::TripleStore;

#[derive(Parser)]
#[command(
    name = "mapsq",
    version,
    about = "Basic graph pattern queries over N-Triples data, joined by a parallel map/sort/reduce pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a data file and print one query's solutions
    Query {
        /// N-Triples data file
        #[arg(long)]
        data: PathBuf,
        /// File containing the query text
        #[arg(long, required_unless_present = "inline", conflicts_with = "inline")]
        query: Option<PathBuf>,
        /// Query text passed directly
        #[arg(long)]
        inline: Option<String>,
        /// Worker threads for matching and joining
        #[arg(long, env = "MAPSQ_WORKERS", default_value_t = 1)]
        workers: usize,
        /// Evaluation engine
        #[arg(long, value_enum, default_value_t = EngineArg::Mr)]
        engine: EngineArg,
    },
    /// Time queries under the parallel join and the nested-loop baseline
    Bench {
        /// N-Triples data file
        #[arg(long)]
        data: PathBuf,
        /// Query files, one query per file
        #[arg(long = "queries", required = true, num_args = 1..)]
        queries: Vec<PathBuf>,
        /// Worker threads for the parallel engine
        #[arg(long, env = "MAPSQ_WORKERS", default_value_t = 4)]
        workers: usize,
        /// Repetitions per query and engine; medians are reported
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
    /// Write a seeded synthetic university dataset as N-Triples
    Generate {
        /// Number of universities to generate
        #[arg(long)]
        universities: u32,
        /// RNG seed; same seed, same output
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output file path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    /// Map/sort/reduce join pipeline
    Mr,
    /// Nested-loop reference join
    Nested,
    /// Brute-force assignment enumeration
    Brute,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; anything else is misuse.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Query {
            data,
            query,
            inline,
            workers,
            engine,
        } => cmd_query(&data, query.as_deref(), inline.as_deref(), workers, engine),
        Command::Bench {
            data,
            queries,
            workers,
            reps,
        } => cmd_bench(&data, &queries, workers, reps),
        Command::Generate {
            universities,
            seed,
            out,
        } => cmd_generate(universities, seed, out),
    };
    ExitCode::from(code)
}

fn fail(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    1
}

fn load_store(path: &Path) -> Result<TripleStore, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    TripleStore::load_ntriples(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_query_file(path: &Path) -> Result<Query, String> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| format!("{}: {e}", path.display()))?;
    parse_query(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn check_workers(workers: usize) -> Result<(), String> {
    if workers == 0 {
        return Err("worker count must be at least 1".to_string());
    }
    Ok(())
}

fn cmd_query(
    data: &Path,
    query_file: Option<&Path>,
    inline: Option<&str>,
    workers: usize,
    engine: EngineArg,
) -> u8 {
    if let Err(m) = check_workers(workers) {
        return fail(m);
    }
    let store = match load_store(data) {
        Ok(s) => s,
        Err(m) => return fail(m),
    };
    let query = match (query_file, inline) {
        (Some(path), None) => match read_query_file(path) {
            Ok(q) => q,
            Err(m) => return fail(m),
        },
        (None, Some(text)) => match parse_query(text) {
            Ok(q) => q,
            Err(e) => return fail(e),
        },
        _ => return fail("pass exactly one of --query and --inline"),
    };

    let result = match engine {
        EngineArg::Brute => match evaluate_bruteforce(&store, &query) {
            Ok(r) => r,
            Err(e) => return fail(e),
        },
        EngineArg::Mr | EngineArg::Nested => {
            let plan = plan_bgp(&store, &query);
            let chosen = match engine {
                EngineArg::Mr => JoinEngine::MapReduce,
                _ => JoinEngine::NestedLoop,
            };
            match execute_with(&store, &plan, &query, workers, chosen) {
                Ok((r, _)) => r,
                Err(e) => return fail(e),
            }
        }
    };
    print_result(&result);
    0
}

fn print_result(result: &ResultSet) {
    let header: Vec<String> = result.schema.iter().map(|v| format!("?{v}")).collect();
    println!("{}", header.join("\t"));
    for row in &result.rows {
        let cells: Vec<String> = row.iter().map(|t| t.to_string()).collect();
        println!("{}", cells.join("\t"));
    }
}

fn cmd_bench(data: &Path, query_files: &[PathBuf], workers: usize, reps: usize) -> u8 {
    if let Err(m) = check_workers(workers) {
        return fail(m);
    }
    if reps == 0 {
        return fail("repetition count must be at least 1");
    }
    let store = match load_store(data) {
        Ok(s) => s,
        Err(m) => return fail(m),
    };
    let mut queries = Vec::with_capacity(query_files.len());
    for path in query_files {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        match read_query_file(path) {
            Ok(q) => queries.push((name, q)),
            Err(m) => return fail(m),
        }
    }

    match run_bench(&store, &queries, workers, reps) {
        Ok(report) => {
            print!("{report}");
            for line in report.machine_lines() {
                println!("{line}");
            }
            0
        }
        Err(e @ BenchError::CardinalityMismatch { .. }) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => fail(e),
    }
}

fn cmd_generate(universities: u32, seed: u64, out: PathBuf) -> u8 {
    if universities == 0 {
        return fail("need at least one university");
    }
    let config = GenConfig {
        universities,
        seed,
        output: out,
    };
    match generate(&config) {
        Ok(count) => {
            println!(
                "wrote {count} triples for {universities} universities (seed {seed}) to {}",
                config.output.display()
            );
            0
        }
        Err(e) => fail(format!("{}: {e}", config.output.display())),
    }
}
