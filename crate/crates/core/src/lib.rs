//! PyLang: a deliberately small imperative language and the harness used to
//! judge programs written in it.
//!
//! The pipeline is [`lexer`] → [`parser`] → [`interpreter`]. [`runtime`]
//! wraps one sandboxed run and classifies its outcome, [`corpus`] and
//! [`metrics`] score solutions against test suites, and [`prelude`] ships
//! PyLang-source implementations of the routines the language leaves out.

pub mod ast;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod interpreter;
pub mod lexer;
pub mod metrics;
pub mod num;
pub mod ops;
pub mod parser;
pub mod prelude;
pub mod runtime;
pub mod span;
pub mod text;
pub mod value;

pub use error::{RuntimeError, RuntimeErrorKind};
pub use parser::{parse_source, SyntaxError};
pub use runtime::{run_source, ExecLimits, RunOutcome, RunStatus};
pub use value::Value;
