//! PyLang-source routines for operations the language leaves to the
//! programmer: parsing integers, splitting text, sorting and so on.
//!
//! Each routine is a standalone `.pyl` asset holding exactly one function.
//! Domain errors return the sentinel, the same value an unassigned array
//! read produces, since the language has no exceptions.

use thiserror::Error;

use crate::ast::{Block, Expr, ExprKind, Item, Program, StmtKind};
use crate::error::RuntimeError;
use crate::interpreter::Interpreter;
use crate::parser::{parse_source, SyntaxError};
use crate::runtime::ExecLimits;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreludeRoutine {
    pub name: &'static str,
    pub source: &'static str,
    pub arity: usize,
    pub doc_line: &'static str,
}

macro_rules! routine {
    ($name:literal, $arity:literal, $doc:literal) => {
        PreludeRoutine {
            name: $name,
            source: include_str!(concat!("../prelude/", $name, ".pyl")),
            arity: $arity,
            doc_line: $doc,
        }
    };
}

pub const ROUTINES: [PreludeRoutine; 9] = [
    routine!("str_to_int", 1, "Parses an optionally signed decimal string; anything else yields the sentinel."),
    routine!("split_lines", 1, "Splits on newlines, with no empty element after a final newline."),
    routine!("split_tokens", 1, "Splits on runs of spaces, never producing empty tokens."),
    routine!("sort", 2, "Insertion-sorts keys 0..n-1 in place, ascending and stable; returns the array."),
    routine!("int_to_str", 1, "Formats an integer in decimal, with a leading minus when negative."),
    routine!("min", 2, "Smallest of keys 0..n-1, or the sentinel when n is 0."),
    routine!("max", 2, "Largest of keys 0..n-1, or the sentinel when n is 0."),
    routine!("contains", 2, "1 if the needle occurs in the haystack as a substring, else 0."),
    routine!("slice", 3, "Fresh array of keys i..j-1 renumbered from 0, with i and j clamped to the array."),
];

pub fn routines() -> &'static [PreludeRoutine] {
    &ROUTINES
}

pub fn get(name: &str) -> Option<&'static PreludeRoutine> {
    ROUTINES.iter().find(|r| r.name == name)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("`{0}` does not parse: {1}")]
    Syntax(&'static str, SyntaxError),
    #[error("`{0}` must contain exactly one function and nothing else")]
    Shape(&'static str),
    #[error("`{0}` defines `{1}` instead")]
    Name(&'static str, String),
    #[error("`{0}` takes {1} parameter(s), declared arity is {2}")]
    Arity(&'static str, usize, usize),
    #[error("`{0}` calls `{1}`, which is neither len nor a prelude routine")]
    Call(&'static str, String),
}

impl PreludeRoutine {
    pub fn program(&self) -> Result<Program, SyntaxError> {
        parse_source(self.source)
    }

    /// Confirms the asset is one function of the declared name and arity
    /// whose only calls are `len` and other prelude routines.
    pub fn audit(&self) -> Result<(), AuditError> {
        let program = self.program().map_err(|e| AuditError::Syntax(self.name, e))?;
        let [Item::Function(f)] = program.items.as_slice() else {
            return Err(AuditError::Shape(self.name));
        };
        if f.name != self.name {
            return Err(AuditError::Name(self.name, f.name.clone()));
        }
        if f.params.len() != self.arity {
            return Err(AuditError::Arity(self.name, f.params.len(), self.arity));
        }
        let mut calls = Vec::new();
        block_calls(&f.body, &mut calls);
        match calls.into_iter().find(|c| c != "len" && get(c).is_none()) {
            Some(bad) => Err(AuditError::Call(self.name, bad)),
            None => Ok(()),
        }
    }
}

fn block_calls(block: &Block, out: &mut Vec<String>) {
    for stmt in block {
        match &stmt.kind {
            StmtKind::Assign { value, .. } | StmtKind::Print(value) | StmtKind::Expr(value) => expr_calls(value, out),
            StmtKind::IndexAssign { index, value, .. } => {
                expr_calls(index, out);
                expr_calls(value, out);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                expr_calls(cond, out);
                block_calls(then_block, out);
                if let Some(b) = else_block {
                    block_calls(b, out);
                }
            }
            StmtKind::While { cond, body } => {
                expr_calls(cond, out);
                block_calls(body, out);
            }
            StmtKind::Return(value) => {
                if let Some(v) = value {
                    expr_calls(v, out);
                }
            }
        }
    }
}

fn expr_calls(expr: &Expr, out: &mut Vec<String>) {
    match &expr.kind {
        ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Str(_) | ExprKind::Var(_) => {}
        ExprKind::Binary { lhs, rhs, .. } => {
            expr_calls(lhs, out);
            expr_calls(rhs, out);
        }
        ExprKind::Index { index, .. } => expr_calls(index, out),
        ExprKind::Call { name, args } => {
            out.push(name.clone());
            args.iter().for_each(|a| expr_calls(a, out));
        }
        ExprKind::Array(items) => items.iter().for_each(|a| expr_calls(a, out)),
    }
}

/// Every routine's source, concatenated in table order.
pub fn bundle() -> String {
    ROUTINES.iter().map(|r| r.source).collect::<Vec<_>>().join("\n")
}

/// Loads the whole prelude into a fresh interpreter and calls `name`.
pub fn call(name: &str, args: Vec<Value>, limits: &ExecLimits) -> Result<Value, RuntimeError> {
    let program = parse_source(&bundle()).expect("prelude assets parse");
    let mut sink = String::new();
    let mut interp = Interpreter::new(&mut sink, limits.clone());
    interp.execute(&program)?;
    interp.call(name, args)
}
