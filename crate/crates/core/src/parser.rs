//! Recursive-descent parser.
//!
//! Precedence, lowest to highest: logical (`&&`, `||`), relational,
//! additive, multiplicative, unary minus / primary. Every binary level is
//! left-associative. Unary minus desugars to `0 - expr`.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::ast::{BinOp, Block, Expr, ExprKind, FunctionDef, Item, Program, Stmt, StmtKind};
use crate::lexer::{self, LexError, Literal, Token, TokenKind};
use crate::num::Int;
use crate::span::{Pos, Span};
use crate::text::PyStr;

/// Upper bound on block nesting and expression height.
pub const MAX_NESTING: u32 = 1000;

/// Words that look like statements from other languages. They lex as
/// identifiers but cannot begin a statement.
const UNSUPPORTED_STATEMENTS: [&str; 7] = ["for", "break", "continue", "switch", "try", "catch", "class"];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}:{}: {message} (expected {expected}, found {})", found.line, found.column, found.describe())]
pub struct ParseError {
    pub message: String,
    pub expected: String,
    pub found: Token,
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        self.found.pos()
    }
}

/// Lexing or parsing failure; either way the program never runs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn pos(&self) -> Pos {
        match self {
            SyntaxError::Lex(e) => e.pos(),
            SyntaxError::Parse(e) => e.pos(),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            SyntaxError::Lex(e) => &e.message,
            SyntaxError::Parse(e) => &e.message,
        }
    }

    /// The diagnostic without its position prefix.
    pub fn detail(&self) -> String {
        match self {
            SyntaxError::Lex(e) => e.message.clone(),
            SyntaxError::Parse(e) => format!("{} (expected {}, found {})", e.message, e.expected, e.found.describe()),
        }
    }
}

/// Lexes and parses a whole program.
pub fn parse_source(source: &str) -> Result<Program, SyntaxError> {
    let tokens = lexer::tokenize(source)?;
    Ok(parse_program(&tokens)?)
}

pub fn parse_program(tokens: &[Token]) -> Result<Program, ParseError> {
    Parser::new(tokens).program()
}

/// Parses a single expression that must span the whole token list.
pub fn parse_expression(tokens: &[Token]) -> Result<Expr, ParseError> {
    let mut p = Parser::new(tokens);
    let expr = p.expression()?;
    if !p.at_end() {
        return Err(p.unexpected("end of input", "unexpected token after expression"));
    }
    Ok(expr)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    eof: Token,
    depth: u32,
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token]) -> Self {
        let eof = match tokens.last() {
            Some(t) if t.kind == TokenKind::EndOfInput => t.clone(),
            Some(t) => Token {
                kind: TokenKind::EndOfInput,
                text: String::new(),
                value: None,
                line: t.span().end.line,
                column: t.span().end.column,
                offset: t.offset + t.text.len(),
            },
            None => Token {
                kind: TokenKind::EndOfInput,
                text: String::new(),
                value: None,
                line: 1,
                column: 1,
                offset: 0,
            },
        };
        Parser {
            tokens,
            pos: 0,
            eof,
            depth: 0,
        }
    }

    fn peek(&self) -> &Token {
        self.peek_at(0)
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        match self.tokens.get(self.pos + ahead) {
            Some(t) if t.kind != TokenKind::EndOfInput => t,
            _ => &self.eof,
        }
    }

    fn at_end(&self) -> bool {
        self.peek().kind == TokenKind::EndOfInput
    }

    fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if tok.kind != TokenKind::EndOfInput {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            message: message.into(),
            expected: expected.to_string(),
            found: self.peek().clone(),
        }
    }

    fn expect_punct(&mut self, text: &str) -> Result<Token, ParseError> {
        if self.peek().is_punct(text) {
            Ok(self.advance())
        } else {
            let message = match text {
                ";" => "missing `;`".to_string(),
                "}" => "missing `}`".to_string(),
                _ => format!("expected `{text}`, found {}", self.peek().describe()),
            };
            Err(self.unexpected(&format!("`{text}`"), message))
        }
    }

    fn expect_identifier(&mut self, what: &str) -> Result<Token, ParseError> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.advance())
        } else {
            Err(self.unexpected(what, format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.unexpected("shallower nesting", "nesting too deep"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut items = Vec::new();
        while !self.at_end() {
            if self.peek().is_keyword("function") {
                items.push(Item::Function(Arc::new(self.function()?)));
            } else {
                items.push(Item::Stmt(self.statement()?));
            }
        }
        Ok(Program { items })
    }

    fn function(&mut self) -> Result<FunctionDef, ParseError> {
        let start = self.advance().span();
        let name = self.expect_identifier("function name")?.text;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        let mut seen = HashSet::new();
        if !self.peek().is_punct(")") {
            loop {
                let param = self.expect_identifier("parameter name")?;
                if !seen.insert(param.text.clone()) {
                    return Err(ParseError {
                        message: format!("duplicate parameter `{}`", param.text),
                        expected: "distinct parameter names".to_string(),
                        found: param,
                    });
                }
                params.push(param.text);
                if self.peek().is_punct(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let (body, end) = self.block()?;
        Ok(FunctionDef {
            name,
            params,
            body,
            span: start.to(end),
        })
    }

    fn block(&mut self) -> Result<(Block, Span), ParseError> {
        self.expect_punct("{")?;
        self.enter()?;
        let mut stmts = Vec::new();
        while !self.peek().is_punct("}") {
            if self.at_end() {
                return Err(self.unexpected("`}`", "missing `}`"));
            }
            stmts.push(self.statement()?);
        }
        let end = self.advance().span();
        self.leave();
        Ok((stmts, end))
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.statement_inner())
    }

    fn statement_inner(&mut self) -> Result<Stmt, ParseError> {
        let tok = self.peek().clone();
        let start = tok.span();
        match tok.kind {
            TokenKind::Keyword => match tok.text.as_str() {
                "if" => self.if_statement(),
                "while" => {
                    self.advance();
                    let cond = self.condition()?;
                    let (body, end) = self.block()?;
                    Ok(Stmt {
                        kind: StmtKind::While { cond, body },
                        span: start.to(end),
                    })
                }
                "return" => {
                    self.advance();
                    let value = if self.peek().is_punct(";") {
                        None
                    } else {
                        Some(self.expression()?)
                    };
                    let end = self.expect_punct(";")?.span();
                    Ok(Stmt {
                        kind: StmtKind::Return(value),
                        span: start.to(end),
                    })
                }
                "print" => {
                    self.advance();
                    self.expect_punct("(")?;
                    let value = self.expression()?;
                    if self.peek().is_punct(",") {
                        return Err(self.unexpected("`)`", "print takes exactly one argument"));
                    }
                    self.expect_punct(")")?;
                    let end = self.expect_punct(";")?.span();
                    Ok(Stmt {
                        kind: StmtKind::Print(value),
                        span: start.to(end),
                    })
                }
                "function" => Err(self.unexpected(
                    "statement",
                    "function definitions are only allowed at top level",
                )),
                "else" => Err(self.unexpected("statement", "`else` without a matching `if`")),
                _ => unreachable!("all keywords handled"),
            },
            TokenKind::Identifier if UNSUPPORTED_STATEMENTS.contains(&tok.text.as_str()) => Err(
                self.unexpected("statement", format!("`{}` is not supported", tok.text)),
            ),
            _ => self.simple_statement(),
        }
    }

    fn if_statement(&mut self) -> Result<Stmt, ParseError> {
        let start = self.advance().span();
        let cond = self.condition()?;
        let (then_block, mut end) = self.block()?;
        let else_block = if self.peek().is_keyword("else") {
            self.advance();
            if !self.peek().is_punct("{") {
                return Err(self.unexpected("`{`", "`else` must be followed by a braced block"));
            }
            let (block, else_end) = self.block()?;
            end = else_end;
            Some(block)
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_block,
                else_block,
            },
            span: start.to(end),
        })
    }

    fn condition(&mut self) -> Result<Expr, ParseError> {
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        Ok(cond)
    }

    /// Assignment, index assignment, or expression statement.
    fn simple_statement(&mut self) -> Result<Stmt, ParseError> {
        let target_tok = self.peek().clone();
        let expr = self.expression()?;
        let start = expr.span;
        if self.peek().is_op("=") {
            self.advance();
            let value = self.expression()?;
            let end = self.expect_punct(";")?.span();
            let kind = match expr.kind {
                ExprKind::Var(name) => StmtKind::Assign { name, value },
                ExprKind::Index { name, index } => StmtKind::IndexAssign {
                    name,
                    index: *index,
                    value,
                },
                _ => {
                    return Err(ParseError {
                        message: "invalid assignment target".to_string(),
                        expected: "variable or `name[index]`".to_string(),
                        found: target_tok,
                    });
                }
            };
            return Ok(Stmt {
                kind,
                span: start.to(end),
            });
        }
        let end = self.expect_punct(";")?.span();
        Ok(Stmt {
            kind: StmtKind::Expr(expr),
            span: start.to(end),
        })
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
            self.enter()?;
            let e = self.logical();
            self.leave();
            e
        })
    }

    fn check_height(&self, expr: &Expr) -> Result<(), ParseError> {
        if expr.height > MAX_NESTING {
            return Err(self.unexpected("shorter expression", "expression nested too deeply"));
        }
        Ok(())
    }

    fn binary_level(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        loop {
            let tok = self.peek();
            if tok.kind != TokenKind::Operator || !ops.contains(&tok.text.as_str()) {
                return Ok(lhs);
            }
            let op = BinOp::from_symbol(&tok.text).expect("operator in table");
            self.advance();
            if self.at_end() || self.peek().is_punct(")") || self.peek().is_punct(";") {
                return Err(self.unexpected("operand", format!("missing operand after `{op}`")));
            }
            let rhs = next(self)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::binary(op, lhs, rhs, span);
            self.check_height(&lhs)?;
        }
    }

    fn logical(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["&&", "||"], Self::relational)
    }

    fn relational(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["==", "!=", "<", ">", "<=", ">="], Self::additive)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["+", "-"], Self::multiplicative)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&["*", "/", "%"], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().is_op("-") {
            let minus = self.advance().span();
            self.enter()?;
            let operand = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.unary());
            self.leave();
            let operand = operand?;
            let zero = Expr::leaf(ExprKind::Int(Int::zero()), minus);
            let span = minus.to(operand.span);
            let e = Expr::binary(BinOp::Sub, zero, operand, span);
            self.check_height(&e)?;
            return Ok(e);
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let bare_name = self.peek().kind == TokenKind::Identifier && !self.peek_at(1).is_punct("(");
        let base = self.primary()?;
        if !self.peek().is_punct("[") {
            return Ok(base);
        }
        if !bare_name {
            return Err(self.unexpected("operator or `;`", "only variables can be indexed"));
        }
        let ExprKind::Var(name) = base.kind else {
            unreachable!("a bare identifier parses to a variable");
        };
        self.advance();
        let index = self.expression()?;
        let close = self.expect_punct("]")?.span();
        if self.peek().is_punct("[") {
            return Err(self.unexpected(
                "operator or `;`",
                "chained indexing not supported; assign the element to a variable first",
            ));
        }
        Ok(Expr::with_children(
            ExprKind::Index {
                name,
                index: Box::new(index),
            },
            base.span.to(close),
        ))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        let span = tok.span();
        match tok.kind {
            TokenKind::Number => {
                self.advance();
                let kind = match tok.value {
                    Some(Literal::Int(v)) => ExprKind::Int(Int::from_bigint(v)),
                    Some(Literal::Float(v)) => ExprKind::Float(v),
                    _ => unreachable!("number token carries a numeric payload"),
                };
                Ok(Expr::leaf(kind, span))
            }
            TokenKind::String => {
                self.advance();
                let Some(Literal::Str(s)) = tok.value else {
                    unreachable!("string token carries text");
                };
                Ok(Expr::leaf(ExprKind::Str(PyStr::new(&s)), span))
            }
            TokenKind::Identifier => {
                self.advance();
                if self.peek().is_punct("(") {
                    self.advance();
                    let (args, close) = self.comma_list(")")?;
                    return Ok(Expr::with_children(
                        ExprKind::Call { name: tok.text, args },
                        span.to(close),
                    ));
                }
                Ok(Expr::leaf(ExprKind::Var(tok.text), span))
            }
            TokenKind::Punct if tok.text == "(" => {
                self.advance();
                let inner = self.expression()?;
                self.expect_punct(")")?;
                if self.peek().is_punct("(") {
                    return Err(self.unexpected("operator", "only named functions can be called"));
                }
                Ok(inner)
            }
            TokenKind::Punct if tok.text == "[" => {
                self.advance();
                let (items, close) = self.comma_list("]")?;
                Ok(Expr::with_children(ExprKind::Array(items), span.to(close)))
            }
            TokenKind::Keyword if tok.text == "print" => Err(self.unexpected(
                "expression",
                "`print` is a statement and cannot be used as a value",
            )),
            _ => Err(self.unexpected(
                "expression",
                format!("expected expression, found {}", tok.describe()),
            )),
        }
    }

    /// Comma-separated expressions up to `close`; no trailing comma.
    fn comma_list(&mut self, close: &str) -> Result<(Vec<Expr>, Span), ParseError> {
        let mut items = Vec::new();
        if !self.peek().is_punct(close) {
            loop {
                items.push(self.expression()?);
                if self.peek().is_punct(",") {
                    self.advance();
                    if self.peek().is_punct(close) {
                        return Err(self.unexpected("expression", "trailing comma not allowed"));
                    }
                } else {
                    break;
                }
            }
        }
        let end = self.expect_punct(close)?.span();
        if let Some(max) = items.iter().map(|e| e.height).max() {
            if max + 1 > MAX_NESTING {
                return Err(self.unexpected("shorter expression", "expression nested too deeply"));
            }
        }
        Ok((items, end))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{dump_expr, dump_program};

    fn expr(src: &str) -> Result<Expr, ParseError> {
        parse_expression(&lexer::tokenize(src).unwrap())
    }

    fn sexpr(src: &str) -> String {
        dump_expr(&expr(src).unwrap())
    }

    fn program(src: &str) -> Result<Program, SyntaxError> {
        parse_source(src)
    }

    #[test]
    fn solve_entry() {
        let p = program("function solve(input) { return 0; }").unwrap();
        assert_eq!(
            dump_program(&p),
            "(program\n  (function solve (input)\n    (return\n      (int 0))))\n"
        );
    }

    #[test]
    fn empty_token_stream() {
        assert!(parse_program(&[]).unwrap().items.is_empty());
        assert!(program("").unwrap().items.is_empty());
        assert!(program("  \n\t").unwrap().items.is_empty());
    }

    #[test]
    fn precedence_examples() {
        assert_eq!(sexpr("1 + 2 * 3"), sexpr("(1 + (2 * 3))"));
        assert_eq!(
            sexpr("1 + 2 * 3"),
            "(binary +\n  (int 1)\n  (binary *\n    (int 2)\n    (int 3)))\n"
        );
        assert_eq!(sexpr("-5"), "(binary -\n  (int 0)\n  (int 5))\n");
        assert_eq!(sexpr("(1 + 2) * 3"), "(binary *\n  (binary +\n    (int 1)\n    (int 2))\n  (int 3))\n");
    }

    #[test]
    fn logical_binds_loosest() {
        // Enumerate both candidate parses; only the one with `&&` at the
        // root is consistent with logical < relational.
        let got = sexpr("a && b == c");
        let logical_root = sexpr("a && (b == c)");
        let relational_root = sexpr("(a && b) == c");
        assert_eq!(got, logical_root);
        assert_ne!(got, relational_root);
        assert!(got.starts_with("(binary &&"));
    }

    #[test]
    fn left_associative_levels() {
        assert_eq!(sexpr("a - b - c"), sexpr("(a - b) - c"));
        assert_eq!(sexpr("a / b * c"), sexpr("(a / b) * c"));
        assert_eq!(sexpr("a % b / c"), sexpr("(a % b) / c"));
        assert_eq!(sexpr("a < b == c"), sexpr("(a < b) == c"));
        assert_eq!(sexpr("a || b && c"), sexpr("(a || b) && c"));
        assert_eq!(sexpr("a + b - c"), sexpr("(a + b) - c"));
    }

    #[test]
    fn unary_minus_binds_tighter_than_multiplication() {
        assert_eq!(sexpr("-a * b"), sexpr("(0 - a) * b"));
        assert_eq!(sexpr("a * -b"), sexpr("a * (0 - b)"));
        assert_eq!(sexpr("--a"), sexpr("0 - (0 - a)"));
    }

    #[test]
    fn dangling_operator_and_unbalanced_parens() {
        assert!(expr("1 +").is_err());
        assert!(expr("(1 + 2").is_err());
        assert!(expr("1 + 2)").is_err());
        assert!(expr("* 3").is_err());
        assert!(expr("").is_err());
    }

    #[test]
    fn chained_indexing_rejected_at_second_bracket() {
        let err = program("x = a[i][j];").unwrap_err();
        let SyntaxError::Parse(e) = err else { panic!("expected parse error") };
        assert_eq!((e.found.line, e.found.column), (1, 9));
        assert!(e.message.contains("chained indexing not supported"));
        assert!(program("a[0][0];").is_err());
        assert!(program("a[0][0] = 1;").is_err());
    }

    #[test]
    fn rejection_set() {
        for src in [
            "for (;;) {}",
            "break;",
            "continue;",
            "a[0][0];",
            "try {} catch {}",
            "class Foo {}",
            "switch (x) {}",
            "x = 1; # c",
            "x = 1; // c",
            "/* c */ x = 1;",
            "if (x) { } else if (y) { }",
            "a = b = c;",
            "x = [1, 2,];",
            "f(1)(2);",
            "print(1, 2);",
            "x = print(1);",
            "function f(a, a) { }",
            "if (x) { function g() {} }",
            "x = 1",
            "while (1) { x = 1;",
            "f(x) = 1;",
            "\"abc\"[0];",
            "x = (a)[0];",
            "else { }",
        ] {
            assert!(program(src).is_err(), "should reject {src:?}");
        }
    }

    #[test]
    fn statements() {
        let p = program(
            "a = []; a[0] = 1; if (a[0] == 1) { print(\"y\"); } else { print(\"n\"); } \
             while (i < 3) { i = i + 1; } f(1, 2); return;",
        )
        .unwrap();
        assert_eq!(p.items.len(), 6);
        let dump = dump_program(&p);
        assert!(dump.contains("(index-assign a"));
        assert!(dump.contains("(else"));
        assert!(dump.contains("(call f"));
        assert!(dump.contains("(return)"));
    }

    #[test]
    fn top_level_statements_before_functions() {
        let p = program("x = 1; function f() { return x; } y = f();").unwrap();
        assert_eq!(p.items.len(), 3);
        assert_eq!(p.functions().count(), 1);
    }

    #[test]
    fn missing_semicolon_reports_position() {
        let SyntaxError::Parse(e) = program("x = 1\ny = 2;").unwrap_err() else { panic!() };
        assert_eq!(e.message, "missing `;`");
        assert_eq!((e.found.line, e.found.column), (2, 1));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let deep = format!("x = {}1{};", "(".repeat(5000), ")".repeat(5000));
        assert!(program(&deep).is_err());
        let long = format!("x = 1{};", " + 1".repeat(5000));
        assert!(program(&long).is_err());
        let minus = format!("x = {}1;", "-".repeat(5000));
        assert!(program(&minus).is_err());
        let blocks = format!("{}{}", "if (1) {".repeat(3000), "}".repeat(3000));
        assert!(program(&blocks).is_err());
        let ok = format!("x = {}1{};", "(".repeat(200), ")".repeat(200));
        assert!(program(&ok).is_ok());
    }
}
