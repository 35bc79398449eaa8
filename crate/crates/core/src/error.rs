use std::fmt;

use thiserror::Error;

use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuntimeErrorKind {
    TypeError,
    UndefinedName,
    UndefinedFunction,
    DivisionByZero,
    ArityMismatch,
    StepBudgetExceeded,
    WallClockExceeded,
    RecursionLimit,
    OutputLimitExceeded,
    /// A single string or integer grew past its size limit.
    MemoryLimit,
}

impl RuntimeErrorKind {
    /// Budget exhaustion rather than a fault in the program's logic.
    pub fn is_timeout(self) -> bool {
        matches!(self, RuntimeErrorKind::StepBudgetExceeded | RuntimeErrorKind::WallClockExceeded)
    }
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub message: String,
    pub span: Option<Span>,
}

impl RuntimeError {
    pub fn new(kind: RuntimeErrorKind, message: impl Into<String>) -> RuntimeError {
        RuntimeError {
            kind,
            message: message.into(),
            span: None,
        }
    }

    pub fn at(mut self, span: Span) -> RuntimeError {
        self.span.get_or_insert(span);
        self
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = self.span {
            write!(f, "{}: ", span.start)?;
        }
        write!(f, "{}: {}", self.kind, self.message)
    }
}
