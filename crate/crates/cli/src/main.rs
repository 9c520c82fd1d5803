//! `csm`: check, transform, compose, analyze, simulate and compare
//! systems of concurrent state machines.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "csm", version, about = "Concurrent state machine toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate every entity in model files.
    Check {
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Common,
    },
    /// Turn statecharts into CSM sections.
    Transform {
        file: PathBuf,
        /// Statecharts to transform (default: all).
        #[arg(long = "name")]
        names: Vec<String>,
        #[command(flatten)]
        opts: Common,
    },
    /// Build the reachability graph of a system.
    Compose {
        file: PathBuf,
        #[command(flatten)]
        opts: Common,
    },
    /// Find terminal components and deadlocks (exit 2 when deadlocks exist).
    Analyze {
        /// Model file or graph document.
        file: PathBuf,
        #[command(flatten)]
        opts: Common,
    },
    /// Replay an environment sequence, one input set per line.
    Simulate {
        file: PathBuf,
        env: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::First)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        opts: Common,
    },
    /// Render a reachability graph as DOT with deadlocks filled black.
    Export {
        /// Model file or graph document.
        file: PathBuf,
        #[command(flatten)]
        opts: Common,
    },
    /// Compare two reachability graphs.
    Diff {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        opts: Common,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// System to use when the file declares several.
    #[arg(long)]
    system: Option<String>,
    /// Add a negated-coverage self-loop to incomplete states.
    #[arg(long)]
    close_incomplete: bool,
    /// Accepting state pattern (repeatable); replaces the file's patterns.
    #[arg(long = "accepting")]
    accepting: Vec<String>,
    /// Largest atom count for truth-table checks.
    #[arg(long)]
    atom_cap: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PolicyArg {
    /// Every combination of enabled transitions.
    All,
    /// The first enabled transition in declaration order.
    First,
    /// A seeded random choice.
    Random,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
