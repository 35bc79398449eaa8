//! Syntax tree produced by the parser, and its S-expression dump.

use std::fmt;
use std::sync::Arc;

use crate::num::{format_float, Int};
use crate::span::Span;
use crate::text::PyStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 13] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Le,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == sym)
    }

    /// Binding strength, 1 (logical) through 4 (multiplicative).
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::And | BinOp::Or => 1,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 2,
            BinOp::Add | BinOp::Sub => 3,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 4,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 2
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Height of this subtree; leaves are 1.
    pub height: u32,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Int(Int),
    Float(f64),
    Str(PyStr),
    Var(String),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// `name[index]`. The base is always a plain variable.
    Index {
        name: String,
        index: Box<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
    Array(Vec<Expr>),
}

impl Expr {
    pub fn leaf(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span, height: 1 }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr, span: Span) -> Expr {
        let height = 1 + lhs.height.max(rhs.height);
        Expr {
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
            height,
        }
    }

    pub fn with_children(kind: ExprKind, span: Span) -> Expr {
        let height = 1 + match &kind {
            ExprKind::Binary { lhs, rhs, .. } => lhs.height.max(rhs.height),
            ExprKind::Index { index, .. } => index.height,
            ExprKind::Call { args, .. } | ExprKind::Array(args) => {
                args.iter().map(|e| e.height).max().unwrap_or(0)
            }
            _ => 0,
        };
        Expr { kind, span, height }
    }
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Assign {
        name: String,
        value: Expr,
    },
    IndexAssign {
        name: String,
        index: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Print(Expr),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum Item {
    Function(Arc<FunctionDef>),
    Stmt(Stmt),
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub items: Vec<Item>,
}

impl Program {
    pub fn functions(&self) -> impl Iterator<Item = &Arc<FunctionDef>> {
        self.items.iter().filter_map(|item| match item {
            Item::Function(f) => Some(f),
            Item::Stmt(_) => None,
        })
    }
}

/// Indented S-expression dump, one node per line. Spans are omitted so
/// structurally equal trees dump identically.
pub fn dump_program(program: &Program) -> String {
    let mut w = Dump::default();
    w.open(0, "program");
    for item in &program.items {
        match item {
            Item::Function(f) => w.function(1, f),
            Item::Stmt(s) => w.stmt(1, s),
        }
    }
    w.close();
    w.finish()
}

pub fn dump_expr(expr: &Expr) -> String {
    let mut w = Dump::default();
    w.expr(0, expr);
    w.finish()
}

#[derive(Default)]
struct Dump {
    lines: Vec<String>,
}

impl Dump {
    fn open(&mut self, depth: usize, head: &str) {
        self.lines.push(format!("{}({}", "  ".repeat(depth), head));
    }

    fn close(&mut self) {
        if let Some(last) = self.lines.last_mut() {
            last.push(')');
        }
    }

    fn leaf(&mut self, depth: usize, head: &str) {
        self.open(depth, head);
        self.close();
    }

    fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }

    fn function(&mut self, depth: usize, f: &FunctionDef) {
        self.open(depth, &format!("function {} ({})", f.name, f.params.join(" ")));
        for s in &f.body {
            self.stmt(depth + 1, s);
        }
        self.close();
    }

    fn block(&mut self, depth: usize, head: &str, block: &Block) {
        self.open(depth, head);
        for s in block {
            self.stmt(depth + 1, s);
        }
        self.close();
    }

    fn stmt(&mut self, depth: usize, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Assign { name, value } => {
                self.open(depth, &format!("assign {name}"));
                self.expr(depth + 1, value);
            }
            StmtKind::IndexAssign { name, index, value } => {
                self.open(depth, &format!("index-assign {name}"));
                self.expr(depth + 1, index);
                self.expr(depth + 1, value);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                self.open(depth, "if");
                self.expr(depth + 1, cond);
                self.block(depth + 1, "then", then_block);
                if let Some(else_block) = else_block {
                    self.block(depth + 1, "else", else_block);
                }
            }
            StmtKind::While { cond, body } => {
                self.open(depth, "while");
                self.expr(depth + 1, cond);
                self.block(depth + 1, "body", body);
            }
            StmtKind::Return(value) => {
                self.open(depth, "return");
                if let Some(v) = value {
                    self.expr(depth + 1, v);
                }
            }
            StmtKind::Print(value) => {
                self.open(depth, "print");
                self.expr(depth + 1, value);
            }
            StmtKind::Expr(value) => {
                self.open(depth, "expr");
                self.expr(depth + 1, value);
            }
        }
        self.close();
    }

    fn expr(&mut self, depth: usize, expr: &Expr) {
        match &expr.kind {
            ExprKind::Int(v) => self.leaf(depth, &format!("int {v}")),
            ExprKind::Float(v) => self.leaf(depth, &format!("float {}", format_float(*v))),
            ExprKind::Str(s) => self.leaf(depth, &format!("str {:?}", s.as_str())),
            ExprKind::Var(name) => self.leaf(depth, &format!("var {name}")),
            ExprKind::Binary { op, lhs, rhs } => {
                self.open(depth, &format!("binary {op}"));
                self.expr(depth + 1, lhs);
                self.expr(depth + 1, rhs);
                self.close();
            }
            ExprKind::Index { name, index } => {
                self.open(depth, &format!("index {name}"));
                self.expr(depth + 1, index);
                self.close();
            }
            ExprKind::Call { name, args } => {
                self.open(depth, &format!("call {name}"));
                for a in args {
                    self.expr(depth + 1, a);
                }
                self.close();
            }
            ExprKind::Array(items) => {
                self.open(depth, "array");
                for a in items {
                    self.expr(depth + 1, a);
                }
                self.close();
            }
        }
    }
}
