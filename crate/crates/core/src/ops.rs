//! Operator semantics over runtime values. No implicit coercion between
//! strings and numbers; ints and floats mix numerically.

use std::cmp::Ordering;

use crate::ast::BinOp;
use crate::error::{RuntimeError, RuntimeErrorKind};
use crate::num::{float_mod_floor, format_float, Int};
use crate::runtime::ExecLimits;
use crate::text::PyStr;
use crate::value::{sentinel, Value};

fn type_error(message: String) -> RuntimeError {
    RuntimeError::new(RuntimeErrorKind::TypeError, message)
}

fn unsupported(op: BinOp, lhs: &Value, rhs: &Value) -> RuntimeError {
    type_error(format!(
        "unsupported operand types for {op}: {} and {}",
        lhs.kind(),
        rhs.kind()
    ))
}

/// Applies `op` with the default value-size limits.
pub fn eval_binary(op: BinOp, lhs: &Value, rhs: &Value) -> Result<Value, RuntimeError> {
    apply_binary(op, lhs, rhs, &ExecLimits::default())
}

pub fn apply_binary(op: BinOp, lhs: &Value, rhs: &Value, limits: &ExecLimits) -> Result<Value, RuntimeError> {
    match op {
        BinOp::Add => add(lhs, rhs, limits),
        BinOp::Sub => numeric(op, lhs, rhs, limits, Int::sub, |a, b| a - b),
        BinOp::Mul => mul(lhs, rhs, limits),
        BinOp::Div => div(lhs, rhs),
        BinOp::Mod => modulo(lhs, rhs),
        BinOp::Eq => Ok(Value::bool(equals(lhs, rhs))),
        BinOp::Ne => Ok(Value::bool(!equals(lhs, rhs))),
        BinOp::Lt => compare(op, lhs, rhs, |o| o == Ordering::Less),
        BinOp::Gt => compare(op, lhs, rhs, |o| o == Ordering::Greater),
        BinOp::Le => compare(op, lhs, rhs, |o| o != Ordering::Greater),
        BinOp::Ge => compare(op, lhs, rhs, |o| o != Ordering::Less),
        BinOp::And => Ok(Value::bool(truthy(lhs)? && truthy(rhs)?)),
        BinOp::Or => Ok(Value::bool(truthy(lhs)? || truthy(rhs)?)),
    }
}

fn check_int(v: Int, limits: &ExecLimits) -> Result<Value, RuntimeError> {
    if v.bits() > limits.max_int_bits {
        return Err(RuntimeError::new(
            RuntimeErrorKind::MemoryLimit,
            format!("integer exceeds {} bits", limits.max_int_bits),
        ));
    }
    Ok(Value::Int(v))
}

fn check_str_len(bytes: usize, limits: &ExecLimits) -> Result<(), RuntimeError> {
    if bytes > limits.max_string_bytes {
        return Err(RuntimeError::new(
            RuntimeErrorKind::MemoryLimit,
            format!("string exceeds {} bytes", limits.max_string_bytes),
        ));
    }
    Ok(())
}

fn numeric(
    op: BinOp,
    lhs: &Value,
    rhs: &Value,
    limits: &ExecLimits,
    on_int: fn(&Int, &Int) -> Int,
    on_float: fn(f64, f64) -> f64,
) -> Result<Value, RuntimeError> {
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => check_int(on_int(a, b), limits),
        _ => match (as_f64(lhs), as_f64(rhs)) {
            (Some(a), Some(b)) => Ok(Value::Float(on_float(a, b))),
            _ => Err(unsupported(op, lhs, rhs)),
        },
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(i.to_f64()),
        Value::Float(x) => Some(*x),
        _ => None,
    }
}

fn add(lhs: &Value, rhs: &Value, limits: &ExecLimits) -> Result<Value, RuntimeError> {
    if let (Value::Str(a), Value::Str(b)) = (lhs, rhs) {
        check_str_len(a.byte_len() + b.byte_len(), limits)?;
        return Ok(Value::Str(a.concat(b)));
    }
    numeric(BinOp::Add, lhs, rhs, limits, Int::add, |a, b| a + b)
}

fn mul(lhs: &Value, rhs: &Value, limits: &ExecLimits) -> Result<Value, RuntimeError> {
    match (lhs, rhs) {
        (Value::Str(s), Value::Int(n)) | (Value::Int(n), Value::Str(s)) => repeat(s, n, limits),
        (Value::Int(a), Value::Int(b)) => {
            if a.bits() + b.bits() > limits.max_int_bits + 1 {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::MemoryLimit,
                    format!("integer exceeds {} bits", limits.max_int_bits),
                ));
            }
            check_int(a.mul(b), limits)
        }
        _ => numeric(BinOp::Mul, lhs, rhs, limits, Int::mul, |a, b| a * b),
    }
}

fn repeat(s: &PyStr, n: &Int, limits: &ExecLimits) -> Result<Value, RuntimeError> {
    if n.is_negative() || n.is_zero() || s.byte_len() == 0 {
        return Ok(Value::str(""));
    }
    let times = n.to_i64().and_then(|t| usize::try_from(t).ok()).unwrap_or(usize::MAX);
    check_str_len(s.byte_len().saturating_mul(times), limits)?;
    Ok(Value::Str(s.repeat(times)))
}

fn is_zero(v: &Value) -> bool {
    match v {
        Value::Int(i) => i.is_zero(),
        Value::Float(x) => *x == 0.0,
        _ => false,
    }
}

fn div(lhs: &Value, rhs: &Value) -> Result<Value, RuntimeError> {
    let (Some(a), Some(b)) = (as_f64(lhs), as_f64(rhs)) else {
        return Err(unsupported(BinOp::Div, lhs, rhs));
    };
    if is_zero(rhs) {
        return Err(RuntimeError::new(RuntimeErrorKind::DivisionByZero, "division by zero"));
    }
    if let (Value::Int(x), Value::Int(y)) = (lhs, rhs) {
        return Ok(Value::Float(x.true_div(y).expect("nonzero divisor")));
    }
    Ok(Value::Float(a / b))
}

fn modulo(lhs: &Value, rhs: &Value) -> Result<Value, RuntimeError> {
    let (Some(a), Some(b)) = (as_f64(lhs), as_f64(rhs)) else {
        return Err(unsupported(BinOp::Mod, lhs, rhs));
    };
    if is_zero(rhs) {
        return Err(RuntimeError::new(RuntimeErrorKind::DivisionByZero, "modulo by zero"));
    }
    if let (Value::Int(x), Value::Int(y)) = (lhs, rhs) {
        return Ok(Value::Int(x.mod_floor(y).expect("nonzero divisor")));
    }
    Ok(Value::Float(float_mod_floor(a, b)))
}

fn numeric_cmp(lhs: &Value, rhs: &Value) -> Option<Option<Ordering>> {
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => Some(Some(a.cmp(b))),
        (Value::Float(a), Value::Float(b)) => Some(a.partial_cmp(b)),
        (Value::Int(a), Value::Float(b)) => Some(a.cmp_f64(*b)),
        (Value::Float(a), Value::Int(b)) => Some(b.cmp_f64(*a).map(Ordering::reverse)),
        _ => None,
    }
}

/// Equality never fails. Strings and numbers compare by value, arrays and
/// functions by identity, and mismatched kinds are simply unequal.
pub fn equals(lhs: &Value, rhs: &Value) -> bool {
    if let Some(ord) = numeric_cmp(lhs, rhs) {
        return ord == Some(Ordering::Equal);
    }
    match (lhs, rhs) {
        (Value::Str(a), Value::Str(b)) => a.as_str() == b.as_str(),
        (Value::Array(a), Value::Array(b)) => std::rc::Rc::ptr_eq(a, b),
        (Value::Func(a), Value::Func(b)) => std::sync::Arc::ptr_eq(a, b),
        _ => false,
    }
}

fn compare(op: BinOp, lhs: &Value, rhs: &Value, test: fn(Ordering) -> bool) -> Result<Value, RuntimeError> {
    if let Some(ord) = numeric_cmp(lhs, rhs) {
        // NaN compares false with everything
        return Ok(Value::bool(ord.is_some_and(test)));
    }
    match (lhs, rhs) {
        (Value::Str(a), Value::Str(b)) => Ok(Value::bool(test(a.as_str().cmp(b.as_str())))),
        _ => Err(unsupported(op, lhs, rhs)),
    }
}

/// Condition truth: numbers only, nonzero is true.
pub fn truthy(v: &Value) -> Result<bool, RuntimeError> {
    match v {
        Value::Int(i) => Ok(!i.is_zero()),
        Value::Float(x) => Ok(*x != 0.0),
        other => Err(type_error(format!("a {} cannot be used as a condition", other.kind()))),
    }
}

/// `len(v)`: characters of a string or assigned keys of an array.
pub fn builtin_len(v: &Value) -> Result<Value, RuntimeError> {
    match v {
        Value::Str(s) => Ok(Value::int(s.char_len() as i64)),
        Value::Array(a) => Ok(Value::int(a.borrow().len() as i64)),
        other => Err(type_error(format!("len() of a {}", other.kind()))),
    }
}

/// `base[index]`. Unassigned array keys read as the sentinel and string
/// positions outside `0..len` read as `""`.
pub fn index(base: &Value, key: &Value) -> Result<Value, RuntimeError> {
    match (base, key) {
        (Value::Array(a), Value::Int(k)) => Ok(a.borrow().get(k).cloned().unwrap_or_else(sentinel)),
        (Value::Str(s), Value::Int(k)) => {
            let ch = k.to_i64().and_then(|i| usize::try_from(i).ok()).and_then(|i| s.char_at(i));
            Ok(Value::Str(ch.unwrap_or_else(|| PyStr::new(""))))
        }
        (Value::Array(_) | Value::Str(_), other) => {
            Err(type_error(format!("index must be an int, not a {}", other.kind())))
        }
        (other, _) => Err(type_error(format!("a {} cannot be indexed", other.kind()))),
    }
}

/// Text written by `print` for `v`, without the trailing newline.
pub fn print_text(v: &Value) -> Result<String, RuntimeError> {
    match v {
        Value::Int(i) => Ok(i.to_string()),
        Value::Float(x) => Ok(format_float(*x)),
        Value::Str(s) => Ok(s.as_str().to_string()),
        other => Err(type_error(format!("cannot print a {}", other.kind()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{Array, SENTINEL};

    fn int(v: i64) -> Value {
        Value::int(v)
    }

    fn kind_of(r: Result<Value, RuntimeError>) -> RuntimeErrorKind {
        r.unwrap_err().kind
    }

    #[test]
    fn string_operations() {
        let r = eval_binary(BinOp::Mul, &Value::str("ab"), &int(3)).unwrap();
        assert_eq!(r.as_str(), Some("ababab"));
        let r = eval_binary(BinOp::Mul, &int(2), &Value::str("xy")).unwrap();
        assert_eq!(r.as_str(), Some("xyxy"));
        let r = eval_binary(BinOp::Mul, &Value::str("x"), &int(0)).unwrap();
        assert_eq!(r.as_str(), Some(""));
        let r = eval_binary(BinOp::Mul, &Value::str("x"), &int(-4)).unwrap();
        assert_eq!(r.as_str(), Some(""));
        let r = eval_binary(BinOp::Add, &Value::str("a"), &Value::str("b")).unwrap();
        assert_eq!(r.as_str(), Some("ab"));
        assert_eq!(kind_of(eval_binary(BinOp::Add, &Value::str("a"), &int(1))), RuntimeErrorKind::TypeError);
        assert_eq!(
            kind_of(eval_binary(BinOp::Mul, &Value::str("a"), &Value::Float(2.0))),
            RuntimeErrorKind::TypeError
        );
    }

    #[test]
    fn huge_repetition_is_refused() {
        let r = eval_binary(BinOp::Mul, &Value::str("ab"), &Value::Int("1000000000000000000000".parse::<num_bigint::BigInt>().unwrap().into()));
        assert_eq!(kind_of(r), RuntimeErrorKind::MemoryLimit);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval_binary(BinOp::Mod, &int(7), &int(3)).unwrap().as_int(), Some(&Int::Small(1)));
        assert!(matches!(eval_binary(BinOp::Div, &int(1), &int(2)).unwrap(), Value::Float(x) if x == 0.5));
        assert!(matches!(eval_binary(BinOp::Div, &int(4), &int(2)).unwrap(), Value::Float(x) if x == 2.0));
        assert!(matches!(eval_binary(BinOp::Add, &int(1), &Value::Float(0.5)).unwrap(), Value::Float(x) if x == 1.5));
        assert!(matches!(eval_binary(BinOp::Mod, &Value::Float(-1.0), &int(3)).unwrap(), Value::Float(x) if x == 2.0));
        assert_eq!(kind_of(eval_binary(BinOp::Div, &int(1), &int(0))), RuntimeErrorKind::DivisionByZero);
        assert_eq!(kind_of(eval_binary(BinOp::Mod, &int(1), &int(0))), RuntimeErrorKind::DivisionByZero);
        assert_eq!(
            kind_of(eval_binary(BinOp::Div, &Value::Float(1.0), &Value::Float(0.0))),
            RuntimeErrorKind::DivisionByZero
        );
    }

    #[test]
    fn comparisons() {
        assert_eq!(eval_binary(BinOp::Le, &int(3), &int(3)).unwrap().as_int(), Some(&Int::Small(1)));
        assert_eq!(
            eval_binary(BinOp::Lt, &Value::str("abc"), &Value::str("abd")).unwrap().as_int(),
            Some(&Int::Small(1))
        );
        assert_eq!(eval_binary(BinOp::Eq, &int(1), &Value::Float(1.0)).unwrap().as_int(), Some(&Int::Small(1)));
        assert_eq!(eval_binary(BinOp::Eq, &Value::str("1"), &int(1)).unwrap().as_int(), Some(&Int::Small(0)));
        assert_eq!(eval_binary(BinOp::Ne, &Value::str("1"), &int(1)).unwrap().as_int(), Some(&Int::Small(1)));
        assert_eq!(kind_of(eval_binary(BinOp::Lt, &Value::str("1"), &int(1))), RuntimeErrorKind::TypeError);
        let nan = Value::Float(f64::NAN);
        assert_eq!(eval_binary(BinOp::Eq, &nan, &nan).unwrap().as_int(), Some(&Int::Small(0)));
        assert_eq!(eval_binary(BinOp::Lt, &nan, &int(1)).unwrap().as_int(), Some(&Int::Small(0)));
    }

    #[test]
    fn array_identity_equality() {
        let a = Value::new_array(Array::new());
        let b = Value::new_array(Array::new());
        assert!(equals(&a, &a.clone()));
        assert!(!equals(&a, &b));
    }

    #[test]
    fn len_and_index() {
        assert_eq!(builtin_len(&Value::str("")).unwrap().as_int(), Some(&Int::Small(0)));
        let mut arr = Array::new();
        arr.set(Int::Small(100), int(5));
        let arr = Value::new_array(arr);
        assert_eq!(builtin_len(&arr).unwrap().as_int(), Some(&Int::Small(1)));
        assert_eq!(index(&arr, &int(100)).unwrap().as_int(), Some(&Int::Small(5)));
        assert_eq!(index(&arr, &int(5)).unwrap().as_int(), Some(&Int::Small(SENTINEL)));
        assert_eq!(kind_of(builtin_len(&int(5))), RuntimeErrorKind::TypeError);
        assert_eq!(kind_of(builtin_len(&Value::Float(1.0))), RuntimeErrorKind::TypeError);
        let s = Value::str("ab");
        assert_eq!(index(&s, &int(10)).unwrap().as_str(), Some(""));
        assert_eq!(index(&s, &int(-1)).unwrap().as_str(), Some(""));
        assert_eq!(index(&s, &int(1)).unwrap().as_str(), Some("b"));
        assert_eq!(kind_of(index(&s, &Value::str("0"))), RuntimeErrorKind::TypeError);
        assert_eq!(kind_of(index(&int(3), &int(0))), RuntimeErrorKind::TypeError);
    }

    #[test]
    fn print_formats() {
        assert_eq!(print_text(&int(-12)).unwrap(), "-12");
        assert_eq!(print_text(&Value::Float(1.0)).unwrap(), "1.0");
        assert_eq!(print_text(&Value::str("a\tb")).unwrap(), "a\tb");
        assert!(print_text(&Value::new_array(Array::new())).is_err());
    }
}
