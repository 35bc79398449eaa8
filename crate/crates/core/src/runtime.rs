//! One sandboxed run: parse, execute the top level, call `solve(stdin)`,
//! and classify what happened.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Program;
use crate::corpus::TestCase;
use crate::error::{RuntimeError, RuntimeErrorKind};
use crate::interpreter::Interpreter;
use crate::num::{format_float, Int};
use crate::parser::{parse_source, SyntaxError};
use crate::span::Pos;
use crate::value::Value;

pub const ENTRY_POINT: &str = "solve";

/// Resource budget for a single run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecLimits {
    /// One step per evaluated statement or expression node.
    pub max_steps: u64,
    pub max_wall_millis: u64,
    pub max_output_bytes: usize,
    /// Maximum depth of nested user-function calls.
    pub max_recursion: usize,
    /// Largest string a program may build.
    pub max_string_bytes: usize,
    /// Largest integer a program may build, in bits.
    pub max_int_bits: u64,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_steps: 50_000_000,
            max_wall_millis: 5_000,
            max_output_bytes: 16 << 20,
            max_recursion: 10_000,
            max_string_bytes: 16 << 20,
            max_int_bits: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("limit `{0}` must be positive")]
pub struct LimitsError(pub &'static str);

impl ExecLimits {
    pub fn validate(&self) -> Result<(), LimitsError> {
        let checks = [
            ("max_steps", self.max_steps == 0),
            ("max_wall_millis", self.max_wall_millis == 0),
            ("max_output_bytes", self.max_output_bytes == 0),
            ("max_recursion", self.max_recursion == 0),
            ("max_string_bytes", self.max_string_bytes == 0),
            ("max_int_bits", self.max_int_bits == 0),
        ];
        match checks.iter().find(|(_, bad)| *bad) {
            Some((name, _)) => Err(LimitsError(name)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunStatus {
    /// Ran to completion; not yet compared against any expectation.
    Completed,
    Pass,
    WrongOutput,
    SyntaxError,
    RuntimeError,
    Timeout,
    OutputOverflow,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Pass => "pass",
            RunStatus::WrongOutput => "wrong_output",
            RunStatus::SyntaxError => "syntax_error",
            RunStatus::RuntimeError => "runtime_error",
            RunStatus::Timeout => "timeout",
            RunStatus::OutputOverflow => "output_overflow",
        }
    }

    /// Process exit code used by `pylang run`.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed | RunStatus::Pass | RunStatus::WrongOutput => 0,
            RunStatus::SyntaxError => 2,
            RunStatus::RuntimeError => 3,
            RunStatus::Timeout => 4,
            RunStatus::OutputOverflow => 5,
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thread-safe snapshot of the value `solve` returned.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnValue {
    Int(Int),
    Float(f64),
    Str(String),
    /// Arrays are summarized by their assigned-key count.
    Array(usize),
    Function(String),
}

impl ReturnValue {
    pub fn snapshot(v: &Value) -> ReturnValue {
        match v {
            Value::Int(i) => ReturnValue::Int(i.clone()),
            Value::Float(x) => ReturnValue::Float(*x),
            Value::Str(s) => ReturnValue::Str(s.as_str().to_string()),
            Value::Array(a) => ReturnValue::Array(a.borrow().len()),
            Value::Func(f) => ReturnValue::Function(f.name.clone()),
        }
    }

    /// Numeric equality in the language's own `==` sense.
    pub fn equals_int(&self, expected: &Int) -> bool {
        match self {
            ReturnValue::Int(i) => i == expected,
            ReturnValue::Float(x) => expected.cmp_f64(*x) == Some(std::cmp::Ordering::Equal),
            _ => false,
        }
    }
}

impl fmt::Display for ReturnValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnValue::Int(i) => write!(f, "{i}"),
            ReturnValue::Float(x) => f.write_str(&format_float(*x)),
            ReturnValue::Str(s) => write!(f, "{s:?}"),
            ReturnValue::Array(n) => write!(f, "<array of {n}>"),
            ReturnValue::Function(name) => write!(f, "<function {name}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorDetail {
    pub message: String,
    pub pos: Option<Pos>,
}

impl fmt::Display for ErrorDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(pos) => write!(f, "{pos}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl From<&SyntaxError> for ErrorDetail {
    fn from(e: &SyntaxError) -> Self {
        ErrorDetail {
            message: e.detail(),
            pos: Some(e.pos()),
        }
    }
}

impl From<&RuntimeError> for ErrorDetail {
    fn from(e: &RuntimeError) -> Self {
        ErrorDetail {
            message: format!("{}: {}", e.kind, e.message),
            pos: e.span.map(|s| s.start),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub stdout: String,
    pub return_value: Option<ReturnValue>,
    pub steps_used: u64,
    pub wall_millis: u64,
    pub error: Option<ErrorDetail>,
    /// Set for runtime errors, timeouts and overflows.
    pub error_kind: Option<RuntimeErrorKind>,
}

impl RunOutcome {
    pub fn syntax_error(e: &SyntaxError) -> RunOutcome {
        RunOutcome {
            status: RunStatus::SyntaxError,
            stdout: String::new(),
            return_value: None,
            steps_used: 0,
            wall_millis: 0,
            error: Some(e.into()),
            error_kind: None,
        }
    }
}

fn classify(kind: RuntimeErrorKind) -> RunStatus {
    if kind.is_timeout() {
        RunStatus::Timeout
    } else if kind == RuntimeErrorKind::OutputLimitExceeded {
        RunStatus::OutputOverflow
    } else {
        RunStatus::RuntimeError
    }
}

/// Parses and runs `source` with `stdin` passed to `solve`.
pub fn run_source(source: &str, stdin: &str, limits: &ExecLimits) -> RunOutcome {
    match parse_source(source) {
        Ok(program) => run_program(&program, stdin, limits),
        Err(e) => RunOutcome::syntax_error(&e),
    }
}

/// Runs an already parsed program with fresh interpreter state.
pub fn run_program(program: &Program, stdin: &str, limits: &ExecLimits) -> RunOutcome {
    run_with_entry(program, Some((ENTRY_POINT, stdin)), limits)
}

/// Runs only the top level; nothing is called afterwards.
pub fn run_script(program: &Program, limits: &ExecLimits) -> RunOutcome {
    run_with_entry(program, None, limits)
}

fn run_with_entry(program: &Program, entry: Option<(&str, &str)>, limits: &ExecLimits) -> RunOutcome {
    let started = Instant::now();
    let mut stdout = String::new();
    let mut interp = Interpreter::new(&mut stdout, limits.clone());
    let result = interp.execute(program).and_then(|()| match entry {
        Some((name, stdin)) => interp.call(name, vec![Value::str(stdin)]),
        None => Ok(Value::int(0)),
    });
    let steps_used = interp.steps_used();
    drop(interp);
    let wall_millis = started.elapsed().as_millis() as u64;
    match result {
        Ok(v) => RunOutcome {
            status: RunStatus::Completed,
            stdout,
            return_value: entry.map(|_| ReturnValue::snapshot(&v)),
            steps_used,
            wall_millis,
            error: None,
            error_kind: None,
        },
        Err(e) => RunOutcome {
            status: classify(e.kind),
            stdout,
            return_value: None,
            steps_used,
            wall_millis,
            error: Some((&e).into()),
            error_kind: Some(e.kind),
        },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Comparator {
    /// Trailing whitespace and trailing blank lines are ignored.
    #[default]
    Normalized,
    /// Byte-for-byte, except that CRLF equals LF.
    Strict,
}

impl Comparator {
    pub fn matches(self, actual: &str, expected: &str) -> bool {
        match self {
            Comparator::Normalized => normalize_output(actual) == normalize_output(expected),
            Comparator::Strict => normalize_newlines(actual) == normalize_newlines(expected),
        }
    }
}

fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Strips trailing whitespace from every line, drops trailing blank lines and
/// turns CRLF or lone CR into LF. The result has no final newline.
pub fn normalize_output(text: &str) -> String {
    let unified = normalize_newlines(text);
    let mut lines: Vec<&str> = unified.split('\n').map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

/// Resolves a completed run against one test's expectations.
pub fn resolve(mut outcome: RunOutcome, test: &TestCase, comparator: Comparator) -> RunOutcome {
    if outcome.status != RunStatus::Completed {
        return outcome;
    }
    let stdout_ok = test
        .expected_stdout
        .as_deref()
        .is_none_or(|expected| comparator.matches(&outcome.stdout, expected));
    let return_ok = test.expected_return.as_ref().is_none_or(|expected| {
        outcome
            .return_value
            .as_ref()
            .is_some_and(|v| v.equals_int(&Int::from(*expected)))
    });
    outcome.status = if stdout_ok && return_ok {
        RunStatus::Pass
    } else {
        RunStatus::WrongOutput
    };
    outcome
}

pub fn judge_test(source: &str, test: &TestCase, limits: &ExecLimits) -> RunOutcome {
    judge_test_with(source, test, limits, Comparator::Normalized)
}

pub fn judge_test_with(source: &str, test: &TestCase, limits: &ExecLimits, comparator: Comparator) -> RunOutcome {
    match parse_source(source) {
        Ok(program) => judge_program(&program, test, limits, comparator),
        Err(e) => RunOutcome::syntax_error(&e),
    }
}

pub fn judge_program(program: &Program, test: &TestCase, limits: &ExecLimits, comparator: Comparator) -> RunOutcome {
    resolve(run_program(program, &test.stdin, limits), test, comparator)
}
