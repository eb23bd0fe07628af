//! The `hornsat verify` command, separated from argument parsing so tests
//! can drive it.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::frontend::parse_spec;
use crate::query::{analyze, Options, Verdict};
use crate::saturate::{Config, Event, Outcome};
use crate::signature::Signature;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    Text,
    Dot,
    None,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: PathBuf,
    pub max_clauses: usize,
    pub max_depth: usize,
    pub emit: Emit,
    pub use_index: bool,
    pub stats: bool,
    /// 1 traces kept and removed clauses, 2 adds every resolvent.
    pub verbosity: u8,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        let defaults = Config::default();
        RunConfig {
            input: input.into(),
            max_clauses: defaults.max_clauses,
            max_depth: defaults.max_depth,
            emit: Emit::Text,
            use_index: true,
            stats: false,
            verbosity: 0,
        }
    }
}

pub mod exit {
    pub const PROVED: i32 = 0;
    pub const DERIVABLE: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const INPUT_ERROR: i32 = 3;
}

/// Where a DOT rendering goes: next to the input, `<input>.deriv.dot`.
pub fn dot_path(input: &Path) -> PathBuf {
    let mut name = input.as_os_str().to_owned();
    name.push(".deriv.dot");
    PathBuf::from(name)
}

/// Runs the verifier and returns the process exit code. Verdicts go to
/// `out`; diagnostics and traces go to `err`.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let src = match std::fs::read_to_string(&config.input) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{}: {e}", config.input.display())?;
            return Ok(exit::INPUT_ERROR);
        }
    };
    let spec = match parse_spec(&src) {
        Ok(s) => s,
        Err(e) => {
            for d in &e.0 {
                writeln!(err, "{}:{d}", config.input.display())?;
            }
            return Ok(exit::INPUT_ERROR);
        }
    };
    let opts = Options {
        saturation: Config {
            max_clauses: config.max_clauses,
            max_depth: config.max_depth,
            use_index: config.use_index,
            ..Config::default()
        },
        ..Options::default()
    };
    let started = Instant::now();
    // The trace only needs names, which desugaring extends; take them from
    // a desugared copy so fresh names print too.
    let trace_sig: Signature = crate::frontend::desugar_precise(&spec).sig;
    let mut trace_err: io::Result<()> = Ok(());
    let verbosity = config.verbosity;
    let mut observer = |ev: Event<'_>| {
        let show = match ev {
            Event::Resolvent(_) => verbosity >= 2,
            _ => verbosity >= 1,
        };
        if show && trace_err.is_ok() {
            trace_err = writeln!(err, "{}", trace_sig.show(&ev));
        }
    };
    let analysis = analyze(&spec, &opts, &mut observer);
    trace_err?;
    let elapsed = started.elapsed();

    let mut dot = String::new();
    for r in &analysis.reports {
        writeln!(out, "{r}")?;
        if let Some(note) = &r.note {
            writeln!(out, "  note: {note}")?;
        }
        if let Some(w) = &r.derivation {
            writeln!(out, "  clause-level derivation; may be a false attack")?;
            match config.emit {
                Emit::Text => {
                    for line in w.text.lines() {
                        writeln!(out, "    {line}")?;
                    }
                }
                Emit::Dot => dot.push_str(&w.dot),
                Emit::None => {}
            }
        }
    }
    if !dot.is_empty() {
        let path = dot_path(&config.input);
        std::fs::write(&path, dot)?;
        writeln!(out, "derivations written to {}", path.display())?;
    }
    if config.stats {
        writeln!(out, "{}", analysis.stats)?;
        let outcome = match analysis.saturation.outcome {
            Outcome::Complete => "complete",
            Outcome::ClauseLimit(_) => "clause_limit",
            Outcome::DepthLimit(_) => "depth_limit",
        };
        writeln!(out, "saturation={outcome}")?;
        writeln!(out, "time_ms={}", elapsed.as_millis())?;
    }
    let verdicts = analysis.reports.iter().map(|r| r.verdict);
    Ok(exit_code(verdicts))
}

/// Any derivable result wins over inconclusive ones.
pub fn exit_code(verdicts: impl IntoIterator<Item = Verdict>) -> i32 {
    let mut code = exit::PROVED;
    for v in verdicts {
        match v {
            Verdict::Derivable => return exit::DERIVABLE,
            Verdict::Inconclusive => code = exit::INCONCLUSIVE,
            Verdict::Proved => {}
        }
    }
    code
}
