//! The `cadfit` command line: reconstruct, eval, gen and a sweep dump.
//!
//! Every command prints exactly one line of JSON on stdout. Exit codes:
//! 0 success, 1 internal error, 2 invalid input, 3 config error.

mod commands;
pub mod generate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub use commands::{eval_paths, reconstruct_to_dir, write_benchmark, EvalOptions, EvalReport};
pub use generate::{random_program, Complexity};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cadfit", version, about = "Recover CAD construction programs from watertight meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a program to a watertight STL mesh.
    Reconstruct {
        mesh: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Compare a predicted program JSON or STL against a ground-truth STL.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        no_align: bool,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Write random program/STL pairs for round-trip benchmarks.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        complexity: Complexity,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the extrusion sweep table of one profile as CSV.
    Sweep {
        mesh: PathBuf,
        /// Index into the extracted profile list.
        #[arg(long, default_value_t = 0)]
        profile: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. }
        | Error::MalformedStl(_)
        | Error::EmptyMesh
        | Error::InvalidMesh(_)
        | Error::DegenerateBounds
        | Error::NotWatertight(_)
        | Error::InvalidProgram { .. }
        | Error::EmptyCloud
        | Error::DegenerateCloud => EXIT_INVALID_INPUT,
        _ => EXIT_INTERNAL,
    }
}

pub fn error_json(e: &Error) -> Value {
    json!({"ok": false, "error": {"kind": e.kind(), "message": e.to_string()}})
}

fn init_threads(threads: usize) {
    // a second initialization (e.g. in tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

/// Runs a parsed command; returns the JSON line and the exit code.
pub fn run(cli: Cli) -> (Value, i32) {
    let result = match cli.command {
        Command::Reconstruct {
            mesh,
            config,
            out,
            seed,
            threads,
        } => {
            init_threads(threads);
            commands::reconstruct(&mesh, config.as_deref(), &out, seed, threads)
        }
        Command::Eval {
            pred,
            gt,
            no_align,
            threads,
        } => {
            init_threads(threads);
            commands::eval_paths(&pred, &gt, &EvalOptions { align: !no_align })
                .map(|r| serde_json::to_value(r).expect("report serializes"))
        }
        Command::Gen {
            n,
            complexity,
            seed,
            out,
        } => commands::write_benchmark(n, complexity, seed, &out),
        Command::Sweep {
            mesh,
            profile,
            config,
            csv,
        } => commands::sweep(&mesh, profile, config.as_deref(), &csv),
    };
    match result {
        Ok(v) => (v, EXIT_OK),
        Err(e) => (error_json(&e), exit_code(&e)),
    }
}
