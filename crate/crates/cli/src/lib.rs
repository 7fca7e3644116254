//! Command-line front end: machine files, validation, exact runs,
//! compilation, closure constructions, DFA analysis and the `L_m`
//! experiment.

pub mod commands;
pub mod format;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{execute, CliError};

#[derive(Debug, Parser)]
#[command(name = "qcfa", version, about = "Workbench for one-way automata with quantum and classical states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Density-matrix configuration evolution.
    Density,
    /// Enumeration of measurement branches with pure-state collapse.
    Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProductKind {
    Intersect,
    Union,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphabetPolicy {
    /// Keep only the symbols both machines read.
    Intersect,
    /// Extend each machine to the union alphabet with a rejecting sink.
    Union,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleMachine {
    /// The `2m + 2` state DFA for `L_m`.
    LmDfa,
    /// The DFA for `a*b*`.
    ShapeDfa,
    /// The track-rotation MO-1QFA recognizing lengths divisible by `m`.
    LmLength,
    /// The 12-classical-state 1QCFA for `L_m`.
    Lm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a machine file; exit 0 if valid, 1 on violations, 2 if unreadable.
    Validate { path: PathBuf },
    /// Print accept and reject probabilities of a word.
    Run {
        path: PathBuf,
        /// Input word: one symbol per character, or whitespace-separated symbols.
        word: String,
        #[arg(long, value_enum, default_value = "density")]
        engine: Engine,
        /// Run both engines and report their largest discrepancy.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Compile a DFA, PFA, MO-1QFA, MM-1QFA or QFA with control language into a 1QCFA.
    Compile {
        path: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Product of two 1QCFA.
    Product {
        #[arg(long, value_enum)]
        op: ProductKind,
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "intersect")]
        alphabet_mode: AlphabetPolicy,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Swap the accepting and rejecting states of a 1QCFA.
    Complement {
        path: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Minimize a DFA and search it for the forbidden construction.
    Analyze {
        path: PathBuf,
        /// Print the minimization map and distinguishing words.
        #[arg(long)]
        minimize: bool,
        /// Search the minimal DFA for the forbidden construction.
        #[arg(long)]
        forbidden: bool,
    },
    /// Build the `L_m` 1QCFA and sweep it against the membership predicate.
    ExperimentLm {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Longest swept word; defaults to `4m`.
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV path; the JSON summary goes next to it with a `.json` extension.
        #[arg(long)]
        report: PathBuf,
    },
    /// Write one of the built-in machines to a file.
    Example {
        #[arg(value_enum)]
        machine: ExampleMachine,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}
