//! The `pylang` command line.
//!
//! Exit codes: 0 success, 1 I/O or input-data failure, 2 syntax error,
//! 3 runtime error, 4 timeout, 5 output overflow, 64 usage error.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ast::dump_program;
use crate::corpus::{load_corpus, load_solutions, Problem};
use crate::lexer::{dump_tokens, tokenize};
use crate::metrics::{aggregate, evaluate, EvalOptions};
use crate::parser::{parse_program, parse_source};
use crate::prelude;
use crate::runtime::{run_program, run_script, Comparator, ExecLimits, RunOutcome, RunStatus, ENTRY_POINT};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "pylang", version, about = "Run, check and evaluate PyLang programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a program. Calls `solve(stdin)` when the program defines it.
    Run {
        program: PathBuf,
        /// Read the program's stdin from this file.
        #[arg(long, conflicts_with = "stdin_literal")]
        input: Option<PathBuf>,
        /// Use this text as the program's stdin.
        #[arg(long, value_name = "TEXT")]
        stdin_literal: Option<String>,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Parse a program without running it.
    Check {
        program: PathBuf,
        /// Print the token stream.
        #[arg(long)]
        tokens: bool,
        /// Print the syntax tree.
        #[arg(long)]
        ast: bool,
    },
    /// Score solutions against a corpus and report pass rates.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory of `<problem id>.txt` files or a JSONL file of solution records.
        #[arg(long)]
        solutions: PathBuf,
        /// Write the full report here instead of to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Add a per-group table keyed on this problem field.
        #[arg(long, value_enum)]
        group: Option<GroupKey>,
        /// Worker threads (default: one per logical core).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
        #[arg(long, value_enum, default_value_t = ComparatorArg::Normalized)]
        comparator: ComparatorArg,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Inspect the bundled prelude routines.
    Prelude {
        #[command(subcommand)]
        action: PreludeAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PreludeAction {
    /// List routines with their arity and contract.
    List,
    /// Print one routine's source.
    Cat { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupKey {
    #[value(name = "stdlib_dependence")]
    StdlibDependence,
    Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComparatorArg {
    Normalized,
    Strict,
}

impl From<ComparatorArg> for Comparator {
    fn from(c: ComparatorArg) -> Self {
        match c {
            ComparatorArg::Normalized => Comparator::Normalized,
            ComparatorArg::Strict => Comparator::Strict,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Step budget; one step per evaluated statement or expression.
    #[arg(long, env = "PYLANG_MAX_STEPS", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_steps: Option<u64>,
    /// Wall-clock budget in milliseconds.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_wall_ms: Option<u64>,
}

impl LimitArgs {
    pub fn limits(&self) -> ExecLimits {
        let mut limits = ExecLimits::default();
        if let Some(steps) = self.max_steps {
            limits.max_steps = steps;
        }
        if let Some(ms) = self.max_wall_ms {
            limits.max_wall_millis = ms;
        }
        limits
    }
}

/// Where a command writes. Everything user-visible goes through here.
pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = io.stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = io.stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Run {
            program,
            input,
            stdin_literal,
            limits,
        } => cmd_run(&program, input.as_deref(), stdin_literal, &limits.limits(), io),
        Command::Check { program, tokens, ast } => cmd_check(&program, tokens, ast, io),
        Command::Eval {
            corpus,
            solutions,
            report,
            group,
            jobs,
            comparator,
            limits,
        } => {
            let options = EvalOptions {
                limits: limits.limits(),
                comparator: comparator.into(),
                jobs: jobs.map(|j| j as usize),
            };
            cmd_eval(&corpus, &solutions, report.as_deref(), group, &options, io)
        }
        Command::Prelude { action } => cmd_prelude(action, io),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(io.stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_run(
    path: &Path,
    input: Option<&Path>,
    literal: Option<String>,
    limits: &ExecLimits,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let source = read_file(path)?;
    let stdin = match (input, literal) {
        (Some(p), _) => read_file(p)?,
        (None, Some(text)) => text,
        (None, None) => {
            let mut text = String::new();
            io.stdin
                .read_to_string(&mut text)
                .map_err(|e| fail(EXIT_FAILURE, format!("reading stdin: {e}")))?;
            text
        }
    };
    let outcome = match parse_source(&source) {
        Err(e) => RunOutcome::syntax_error(&e),
        Ok(program) if program.functions().any(|f| f.name == ENTRY_POINT) => run_program(&program, &stdin, limits),
        Ok(program) => run_script(&program, limits),
    };
    let _ = io.stdout.write_all(outcome.stdout.as_bytes());
    let _ = io.stdout.flush();
    if let Some(detail) = &outcome.error {
        let label = match outcome.status {
            RunStatus::SyntaxError => "syntax error",
            RunStatus::Timeout => "timeout",
            RunStatus::OutputOverflow => "output overflow",
            _ => "runtime error",
        };
        let _ = writeln!(io.stderr, "{}", diagnostic(path, detail.pos, label, &detail.message));
    }
    Ok(outcome.status.exit_code())
}

fn diagnostic(path: &Path, pos: Option<crate::span::Pos>, label: &str, message: &str) -> String {
    match pos {
        Some(p) => format!("{}:{}:{}: {label}: {message}", path.display(), p.line, p.column),
        None => format!("{}: {label}: {message}", path.display()),
    }
}

fn cmd_check(path: &Path, tokens: bool, ast: bool, io: &mut Io<'_>) -> Result<i32, Failure> {
    let source = read_file(path)?;
    let syntax = |pos, msg: &str, io: &mut Io<'_>| {
        let _ = writeln!(io.stderr, "{}", diagnostic(path, Some(pos), "syntax error", msg));
        RunStatus::SyntaxError.exit_code()
    };
    let toks = match tokenize(&source) {
        Ok(t) => t,
        Err(e) => return Ok(syntax(e.pos(), &e.message, io)),
    };
    if tokens {
        let _ = io.stdout.write_all(dump_tokens(&toks).as_bytes());
    }
    let program = match parse_program(&toks) {
        Ok(p) => p,
        Err(e) => {
            let msg = format!("{} (expected {}, found {})", e.message, e.expected, e.found.describe());
            return Ok(syntax(e.pos(), &msg, io));
        }
    };
    if ast {
        let _ = io.stdout.write_all(dump_program(&program).as_bytes());
    }
    Ok(0)
}

fn grouping(problems: &[Problem], key: GroupKey) -> HashMap<String, String> {
    problems
        .iter()
        .map(|p| {
            let label = match key {
                GroupKey::StdlibDependence => p
                    .stdlib_dependence
                    .map(|d| d.as_str().to_string())
                    .unwrap_or_else(|| crate::metrics::UNLABELED.to_string()),
                GroupKey::Source => serde_json::to_value(p.source)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
            };
            (p.id.clone(), label)
        })
        .collect()
}

fn cmd_eval(
    corpus: &Path,
    solutions: &Path,
    report: Option<&Path>,
    group: Option<GroupKey>,
    options: &EvalOptions,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let problems = load_corpus(corpus).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", corpus.display())))?;
    if problems.is_empty() {
        return Err(fail(EXIT_FAILURE, format!("{}: corpus has no problems", corpus.display())));
    }
    let sols = load_solutions(solutions).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", solutions.display())))?;
    let scores = evaluate(&problems, &sols, options).map_err(|e| fail(EXIT_FAILURE, e.to_string()))?;
    let labels = group.map(|k| grouping(&problems, k));
    let metrics = aggregate(&scores, labels.as_ref()).map_err(|e| fail(EXIT_FAILURE, e.to_string()))?;
    let rendered = metrics.render();
    match report {
        Some(path) => {
            fs::write(path, &rendered).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", path.display())))?
        }
        None => {
            let _ = io.stdout.write_all(rendered.as_bytes());
            let _ = writeln!(io.stdout);
        }
    }
    let _ = writeln!(io.stdout, "{}", metrics.summary_line());
    Ok(0)
}

fn cmd_prelude(action: PreludeAction, io: &mut Io<'_>) -> Result<i32, Failure> {
    match action {
        PreludeAction::List => {
            for r in prelude::routines() {
                let _ = writeln!(io.stdout, "{:<13} {}  {}", r.name, r.arity, r.doc_line);
            }
        }
        PreludeAction::Cat { name } => {
            let r = prelude::get(&name).ok_or_else(|| fail(EXIT_FAILURE, format!("no prelude routine `{name}`")))?;
            let _ = io.stdout.write_all(r.source.as_bytes());
        }
    }
    Ok(0)
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let mut io = Io {
        stdin: &mut stdin.lock(),
        stdout: &mut out,
        stderr: &mut err,
    };
    let code = run_cli(std::env::args_os(), &mut io);
    let _ = out.flush();
    let _ = err.flush();
    code
}
