//! Tree-walking evaluator.
//!
//! Scoping: code outside any function reads and writes the global scope.
//! Each call gets one fresh local scope holding its parameters; reads fall
//! back to globals, writes always land in the local scope, so a function can
//! never rebind a global. Blocks do not introduce scopes.
//!
//! Every statement and expression node evaluated costs one step against
//! [`ExecLimits::max_steps`].

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::ast::{BinOp, Block, Expr, ExprKind, FunctionDef, Item, Program, Stmt, StmtKind};
use crate::error::{RuntimeError, RuntimeErrorKind};
use crate::ops;
use crate::runtime::ExecLimits;
use crate::span::Span;
use crate::value::{Array, Value};

const RED_ZONE: usize = 128 * 1024;
const STACK_SEGMENT: usize = 2 * 1024 * 1024;
const CLOCK_CHECK_INTERVAL: u64 = 256;

/// Name bindings left behind after a run.
#[derive(Debug, Default, Clone)]
pub struct Scope {
    bindings: HashMap<String, Value>,
}

impl Scope {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }
}

enum Flow {
    Normal,
    Return(Value),
}

pub struct Interpreter<'o> {
    limits: ExecLimits,
    wall_limit: Duration,
    globals: HashMap<String, Value>,
    frames: Vec<HashMap<String, Value>>,
    out: &'o mut String,
    steps: u64,
    started: Instant,
}

impl<'o> Interpreter<'o> {
    /// `out` receives everything the program prints. The wall clock starts now.
    pub fn new(out: &'o mut String, limits: ExecLimits) -> Self {
        Interpreter {
            wall_limit: Duration::from_millis(limits.max_wall_millis),
            limits,
            globals: HashMap::new(),
            frames: Vec::new(),
            out,
            steps: 0,
            started: Instant::now(),
        }
    }

    pub fn steps_used(&self) -> u64 {
        self.steps
    }

    pub fn global(&self, name: &str) -> Option<&Value> {
        self.globals.get(name)
    }

    pub fn into_scope(self) -> Scope {
        Scope {
            bindings: self.globals,
        }
    }

    /// Runs the top level in source order. Function definitions bind when
    /// reached; a top-level `return` stops the run early.
    pub fn execute(&mut self, program: &Program) -> Result<(), RuntimeError> {
        for item in &program.items {
            match item {
                Item::Function(f) => {
                    self.tick(f.span)?;
                    self.globals.insert(f.name.clone(), Value::Func(Arc::clone(f)));
                }
                Item::Stmt(stmt) => {
                    if let Flow::Return(_) = self.exec_stmt(stmt)? {
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    /// Calls the function bound to `name` (locals, then globals).
    pub fn call(&mut self, name: &str, args: Vec<Value>) -> Result<Value, RuntimeError> {
        let func = self.resolve_function(name)?;
        self.call_function(&func, args, func.span)
    }

    fn resolve_function(&self, name: &str) -> Result<Arc<FunctionDef>, RuntimeError> {
        match self.lookup(name) {
            Some(Value::Func(f)) => Ok(Arc::clone(f)),
            Some(other) => Err(RuntimeError::new(
                RuntimeErrorKind::TypeError,
                format!("`{name}` is a {}, not a function", other.kind()),
            )),
            None => Err(RuntimeError::new(
                RuntimeErrorKind::UndefinedFunction,
                format!("undefined function `{name}`"),
            )),
        }
    }

    fn tick(&mut self, span: Span) -> Result<(), RuntimeError> {
        if self.steps >= self.limits.max_steps {
            return Err(RuntimeError::new(
                RuntimeErrorKind::StepBudgetExceeded,
                format!("step budget of {} exhausted", self.limits.max_steps),
            )
            .at(span));
        }
        self.steps += 1;
        if self.steps % CLOCK_CHECK_INTERVAL == 0 && self.started.elapsed() > self.wall_limit {
            return Err(RuntimeError::new(
                RuntimeErrorKind::WallClockExceeded,
                format!("wall-clock limit of {} ms exceeded", self.limits.max_wall_millis),
            )
            .at(span));
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        if let Some(v) = self.frames.last().and_then(|f| f.get(name)) {
            return Some(v);
        }
        self.globals.get(name)
    }

    fn assign(&mut self, name: &str, value: Value) {
        let scope = match self.frames.last_mut() {
            Some(frame) => frame,
            None => &mut self.globals,
        };
        match scope.get_mut(name) {
            Some(slot) => *slot = value,
            None => {
                scope.insert(name.to_string(), value);
            }
        }
    }

    fn call_function(&mut self, func: &Arc<FunctionDef>, args: Vec<Value>, span: Span) -> Result<Value, RuntimeError> {
        if args.len() != func.params.len() {
            return Err(RuntimeError::new(
                RuntimeErrorKind::ArityMismatch,
                format!(
                    "`{}` takes {} argument(s) but {} were given",
                    func.name,
                    func.params.len(),
                    args.len()
                ),
            )
            .at(span));
        }
        if self.frames.len() >= self.limits.max_recursion {
            return Err(RuntimeError::new(
                RuntimeErrorKind::RecursionLimit,
                format!("call depth exceeded {}", self.limits.max_recursion),
            )
            .at(span));
        }
        let locals: HashMap<String, Value> = func.params.iter().cloned().zip(args).collect();
        self.frames.push(locals);
        let result = stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || self.exec_block(&func.body));
        self.frames.pop();
        match result? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::int(0)),
        }
    }

    fn exec_block(&mut self, block: &Block) -> Result<Flow, RuntimeError> {
        for stmt in block {
            if let flow @ Flow::Return(_) = self.exec_stmt(stmt)? {
                return Ok(flow);
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt) -> Result<Flow, RuntimeError> {
        stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || self.exec_stmt_inner(stmt))
    }

    fn exec_stmt_inner(&mut self, stmt: &Stmt) -> Result<Flow, RuntimeError> {
        self.tick(stmt.span)?;
        match &stmt.kind {
            StmtKind::Assign { name, value } => {
                let v = self.eval(value)?;
                self.assign(name, v);
            }
            StmtKind::IndexAssign { name, index, value } => {
                let key = self.eval(index)?;
                let v = self.eval(value)?;
                let target = match self.lookup(name) {
                    Some(Value::Array(a)) => a.clone(),
                    Some(other) => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::TypeError,
                            format!("cannot assign into a {} by index", other.kind()),
                        )
                        .at(stmt.span));
                    }
                    None => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::UndefinedName,
                            format!("undefined variable `{name}`"),
                        )
                        .at(stmt.span));
                    }
                };
                let Value::Int(key) = key else {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::TypeError,
                        format!("array keys must be ints, not a {}", key.kind()),
                    )
                    .at(index.span));
                };
                target.borrow_mut().set(key, v);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let c = self.eval(cond)?;
                if ops::truthy(&c).map_err(|e| e.at(cond.span))? {
                    return self.exec_block(then_block);
                } else if let Some(else_block) = else_block {
                    return self.exec_block(else_block);
                }
            }
            StmtKind::While { cond, body } => loop {
                let c = self.eval(cond)?;
                if !ops::truthy(&c).map_err(|e| e.at(cond.span))? {
                    break;
                }
                if let flow @ Flow::Return(_) = self.exec_block(body)? {
                    return Ok(flow);
                }
            },
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(e)?,
                    None => Value::int(0),
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Print(value) => {
                let v = self.eval(value)?;
                let text = ops::print_text(&v).map_err(|e| e.at(value.span))?;
                if self.out.len() + text.len() + 1 > self.limits.max_output_bytes {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::OutputLimitExceeded,
                        format!("output exceeded {} bytes", self.limits.max_output_bytes),
                    )
                    .at(stmt.span));
                }
                self.out.push_str(&text);
                self.out.push('\n');
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn eval(&mut self, expr: &Expr) -> Result<Value, RuntimeError> {
        stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || self.eval_inner(expr))
    }

    fn eval_inner(&mut self, expr: &Expr) -> Result<Value, RuntimeError> {
        self.tick(expr.span)?;
        match &expr.kind {
            ExprKind::Int(v) => Ok(Value::Int(v.clone())),
            ExprKind::Float(v) => Ok(Value::Float(*v)),
            ExprKind::Str(s) => Ok(Value::Str(s.clone())),
            ExprKind::Var(name) => self.lookup(name).cloned().ok_or_else(|| {
                RuntimeError::new(RuntimeErrorKind::UndefinedName, format!("undefined variable `{name}`"))
                    .at(expr.span)
            }),
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs)?;
                match op {
                    BinOp::And | BinOp::Or => {
                        let lt = ops::truthy(&l).map_err(|e| e.at(lhs.span))?;
                        if lt == (*op == BinOp::Or) {
                            return Ok(Value::bool(lt));
                        }
                        let r = self.eval(rhs)?;
                        let rt = ops::truthy(&r).map_err(|e| e.at(rhs.span))?;
                        Ok(Value::bool(rt))
                    }
                    _ => {
                        let r = self.eval(rhs)?;
                        ops::apply_binary(*op, &l, &r, &self.limits).map_err(|e| e.at(expr.span))
                    }
                }
            }
            ExprKind::Index { name, index } => {
                let base = self.lookup(name).cloned().ok_or_else(|| {
                    RuntimeError::new(RuntimeErrorKind::UndefinedName, format!("undefined variable `{name}`"))
                        .at(expr.span)
                })?;
                let key = self.eval(index)?;
                ops::index(&base, &key).map_err(|e| e.at(expr.span))
            }
            ExprKind::Call { name, args } => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a)?);
                }
                if name == "len" {
                    if values.len() != 1 {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::ArityMismatch,
                            format!("len() takes 1 argument but {} were given", values.len()),
                        )
                        .at(expr.span));
                    }
                    return ops::builtin_len(&values[0]).map_err(|e| e.at(expr.span));
                }
                let func = self.resolve_function(name).map_err(|e| e.at(expr.span))?;
                self.call_function(&func, values, expr.span)
            }
            ExprKind::Array(items) => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(self.eval(item)?);
                }
                Ok(Value::new_array(Array::from_values(values)))
            }
        }
    }
}

/// Runs the top level of `program`, appending printed output to `out`.
pub fn execute(program: &Program, out: &mut String, limits: &ExecLimits) -> Result<Scope, RuntimeError> {
    let mut interp = Interpreter::new(out, limits.clone());
    interp.execute(program)?;
    Ok(interp.into_scope())
}

/// Runs the top level, then calls `entry` with `stdin` as its only
/// argument. A function that falls off its end returns `0`.
pub fn call_entry(
    program: &Program,
    entry: &str,
    stdin: &str,
    out: &mut String,
    limits: &ExecLimits,
) -> Result<Value, RuntimeError> {
    let mut interp = Interpreter::new(out, limits.clone());
    interp.execute(program)?;
    let func = interp.resolve_function(entry)?;
    if func.params.len() != 1 {
        return Err(RuntimeError::new(
            RuntimeErrorKind::ArityMismatch,
            format!("entry `{entry}` must take exactly one argument"),
        )
        .at(func.span));
    }
    interp.call_function(&func, vec![Value::str(stdin)], func.span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Int;
    use crate::parse_source;
    use crate::value::SENTINEL;

    fn run(src: &str) -> Result<String, RuntimeError> {
        let program = parse_source(src).unwrap();
        let mut out = String::new();
        execute(&program, &mut out, &ExecLimits::default())?;
        Ok(out)
    }

    fn run_err(src: &str) -> RuntimeErrorKind {
        run(src).unwrap_err().kind
    }

    #[test]
    fn pair_count_program() {
        // n * (a[i] + a[j]) == 2 * total over a = [1, 2, 3]:
        // (0,1): 3*3=9 vs 12; (0,2): 3*4=12 vs 12; (1,2): 3*5=15 vs 12
        let src = r#"
            function solve(a, n) {
              count = 0; i = 0; sum = 0; t = 0;
              while (t < n) {
                sum = sum + a[t];
                t = t + 1;
              }
              while (i < n) {
                j = i + 1;
                while (j < n) {
                  if (n*(a[i]+a[j]) == 2*sum) {
                    count=count+1;
                  }
                  j = j + 1;
                }
                i = i + 1;
              }
              print(count);
            }
            a = []; a[0]=1; a[1]=2; a[2]=3; n=3;
            solve(a, n);
        "#;
        assert_eq!(run(src).unwrap(), "1\n");
    }

    #[test]
    fn sentinel_and_string_bounds() {
        assert_eq!(run("a = []; print(a[5]);").unwrap(), format!("{SENTINEL}\n"));
        assert_eq!(run("print(\"ab\" * 3);").unwrap(), "ababab\n");
        assert_eq!(run("s = \"ab\"; print(s[10]);").unwrap(), "\n");
        assert_eq!(run_err("x = \"a\" + 1;"), RuntimeErrorKind::TypeError);
    }

    #[test]
    fn call_entry_returns_value() {
        let program = parse_source("function solve(input) { return len(input); }").unwrap();
        let mut out = String::new();
        let v = call_entry(&program, "solve", "abc", &mut out, &ExecLimits::default()).unwrap();
        assert_eq!(v.as_int(), Some(&Int::Small(3)));
        let program = parse_source("function solve(input) { x = 1; }").unwrap();
        let v = call_entry(&program, "solve", "", &mut out, &ExecLimits::default()).unwrap();
        assert_eq!(v.as_int(), Some(&Int::Small(0)));
    }

    #[test]
    fn call_entry_errors() {
        let limits = ExecLimits::default();
        let mut out = String::new();
        let p = parse_source("x = 1;").unwrap();
        assert_eq!(
            call_entry(&p, "solve", "", &mut out, &limits).unwrap_err().kind,
            RuntimeErrorKind::UndefinedFunction
        );
        let p = parse_source("function solve(a, b) { return 0; }").unwrap();
        assert_eq!(
            call_entry(&p, "solve", "", &mut out, &limits).unwrap_err().kind,
            RuntimeErrorKind::ArityMismatch
        );
    }

    #[test]
    fn return_without_value_is_zero() {
        assert_eq!(run("function f() { return; } print(f());").unwrap(), "0\n");
    }

    #[test]
    fn locals_shadow_globals() {
        let src = "x = 1; function f() { x = 2; return x; } print(f()); print(x);";
        assert_eq!(run(src).unwrap(), "2\n1\n");
        let src = "g = 5; function f() { return g + 1; } print(f());";
        assert_eq!(run(src).unwrap(), "6\n");
    }

    #[test]
    fn arrays_alias_scalars_copy() {
        let src = "function f(a, n) { a[0] = 9; n = 7; a = []; a[0] = 1; } \
                   b = [1, 2]; m = 3; f(b, m); print(b[0]); print(m); print(len(b));";
        assert_eq!(run(src).unwrap(), "9\n3\n2\n");
    }

    #[test]
    fn recursion_and_limit() {
        let src = "function fact(n) { if (n <= 1) { return 1; } return n * fact(n - 1); } print(fact(25));";
        assert_eq!(run(src).unwrap(), "15511210043330985984000000\n");
        let deep = "function down(n) { if (n == 0) { return 0; } return down(n - 1); } print(down(9999));";
        assert_eq!(run(deep).unwrap(), "0\n");
        let too_deep = "function down(n) { if (n == 0) { return 0; } return down(n - 1); } print(down(10000));";
        assert_eq!(run_err(too_deep), RuntimeErrorKind::RecursionLimit);
    }

    #[test]
    fn step_budget() {
        let program = parse_source("while (1) { }").unwrap();
        let mut out = String::new();
        let limits = ExecLimits {
            max_steps: 1000,
            ..ExecLimits::default()
        };
        let mut interp = Interpreter::new(&mut out, limits);
        let err = interp.execute(&program).unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::StepBudgetExceeded);
        assert_eq!(interp.steps_used(), 1000);
    }

    #[test]
    fn short_circuit() {
        assert_eq!(run("function boom() { return 1 / 0; } print(0 && boom()); print(1 || boom());").unwrap(), "0\n1\n");
        assert_eq!(run("print(2 && 3); print(0 || 0.0);").unwrap(), "1\n0\n");
        assert_eq!(run_err("print(\"a\" && 1);"), RuntimeErrorKind::TypeError);
    }

    #[test]
    fn conditions_must_be_numeric() {
        assert_eq!(run_err("if (\"x\") { }"), RuntimeErrorKind::TypeError);
        assert_eq!(run_err("a = []; while (a) { }"), RuntimeErrorKind::TypeError);
        assert_eq!(run("if (0.5) { print(1); } else { print(2); }").unwrap(), "1\n");
    }

    #[test]
    fn undefined_things() {
        assert_eq!(run_err("print(y);"), RuntimeErrorKind::UndefinedName);
        assert_eq!(run_err("f();"), RuntimeErrorKind::UndefinedFunction);
        assert_eq!(run_err("f(); function f() { }"), RuntimeErrorKind::UndefinedFunction);
        assert_eq!(run_err("a[0] = 1;"), RuntimeErrorKind::UndefinedName);
        assert_eq!(run_err("x = 3; x();"), RuntimeErrorKind::TypeError);
        assert_eq!(run_err("function f(a) { } f();"), RuntimeErrorKind::ArityMismatch);
        assert_eq!(run_err("print(len(\"a\", \"b\"));"), RuntimeErrorKind::ArityMismatch);
    }

    #[test]
    fn functions_are_values() {
        let src = "function twice(f, x) { return f(f(x)); } function inc(n) { return n + 1; } print(twice(inc, 5));";
        assert_eq!(run(src).unwrap(), "7\n");
        assert_eq!(run("function f() { return 1; } function f() { return 2; } print(f());").unwrap(), "2\n");
    }

    #[test]
    fn index_assign_rules() {
        assert_eq!(run_err("s = \"abc\"; s[0] = \"x\";"), RuntimeErrorKind::TypeError);
        assert_eq!(run_err("a = []; a[\"k\"] = 1;"), RuntimeErrorKind::TypeError);
        assert_eq!(run_err("a = []; a[1.0] = 1;"), RuntimeErrorKind::TypeError);
        assert_eq!(run("a = []; a[-3] = 4; print(a[-3]); print(len(a));").unwrap(), "4\n1\n");
    }

    #[test]
    fn printing_rules() {
        assert_eq!(run("print(1 / 2); print(4 / 2); print(-7 % 3);").unwrap(), "0.5\n2.0\n2\n");
        assert_eq!(run_err("print([1]);"), RuntimeErrorKind::TypeError);
        assert_eq!(run_err("function f() { } print(f);"), RuntimeErrorKind::TypeError);
    }

    #[test]
    fn output_limit() {
        let program = parse_source("while (1) { print(\"xxxxxxxxxx\"); }").unwrap();
        let mut out = String::new();
        let limits = ExecLimits {
            max_output_bytes: 100,
            ..ExecLimits::default()
        };
        let err = execute(&program, &mut out, &limits).unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::OutputLimitExceeded);
        assert_eq!(out.len(), 99);
    }

    #[test]
    fn value_size_limits() {
        assert_eq!(run_err("s = \"ab\"; while (1) { s = s + s; }"), RuntimeErrorKind::MemoryLimit);
        assert_eq!(run_err("x = 3; while (1) { x = x * x; }"), RuntimeErrorKind::MemoryLimit);
    }

    #[test]
    fn top_level_return_stops_execution() {
        assert_eq!(run("print(1); return; print(2);").unwrap(), "1\n");
    }

    #[test]
    fn errors_carry_positions() {
        let err = run("x = 1;\ny = x + \"s\";").unwrap_err();
        assert_eq!(err.span.unwrap().start.line, 2);
    }
}
