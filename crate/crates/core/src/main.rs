use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hornsat::cli::{run, Emit, RunConfig};

#[derive(Parser)]
#[command(name = "hornsat", version, about = "Horn-clause protocol verifier")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Text,
    Dot,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Saturate the clauses of FILE and answer its lemmas and queries.
    Verify {
        /// Input file with declarations, clauses, assertions and queries.
        file: PathBuf,
        /// Give up after generating this many clauses.
        #[arg(long, default_value_t = 50_000)]
        max_clauses: usize,
        /// Discard clauses with terms deeper than this.
        #[arg(long, default_value_t = 100)]
        max_depth: usize,
        /// How to print derivations; dot writes FILE.deriv.dot.
        #[arg(long, value_enum, default_value = "text")]
        emit_derivation: EmitArg,
        /// Scan all clauses instead of using the feature index.
        #[arg(long)]
        no_index: bool,
        /// Print saturation counters and timing after the verdicts.
        #[arg(long)]
        stats: bool,
        /// Trace saturation on stderr; repeat for resolvents.
        #[arg(short, action = clap::ArgAction::Count)]
        verbose: u8,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let Command::Verify {
        file,
        max_clauses,
        max_depth,
        emit_derivation,
        no_index,
        stats,
        verbose,
    } = args.command;
    let mut config = RunConfig::new(file);
    config.max_clauses = max_clauses;
    config.max_depth = max_depth;
    config.emit = match emit_derivation {
        EmitArg::Text => Emit::Text,
        EmitArg::Dot => Emit::Dot,
        EmitArg::None => Emit::None,
    };
    config.use_index = !no_index;
    config.stats = stats;
    config.verbosity = verbose;
    let code = match run(&config, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hornsat: {e}");
            3
        }
    };
    ExitCode::from(code as u8)
}
