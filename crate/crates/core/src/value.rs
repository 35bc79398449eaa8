use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use crate::ast::FunctionDef;
use crate::num::{format_float, Int};
use crate::text::PyStr;

/// Read result for an array key that was never assigned: `-(2^63 - 1)`.
pub const SENTINEL: i64 = -i64::MAX;

pub fn sentinel() -> Value {
    Value::Int(Int::Small(SENTINEL))
}

/// Sparse map from integer keys to values.
#[derive(Debug, Default, Clone)]
pub struct Array {
    entries: HashMap<Int, Value>,
}

impl Array {
    pub fn new() -> Array {
        Array::default()
    }

    pub fn from_values(values: impl IntoIterator<Item = Value>) -> Array {
        let entries = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| (Int::Small(i as i64), v))
            .collect();
        Array { entries }
    }

    pub fn get(&self, key: &Int) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn set(&mut self, key: Int, value: Value) {
        self.entries.insert(key, value);
    }

    /// Number of assigned keys.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending key order.
    pub fn sorted_entries(&self) -> Vec<(Int, Value)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

pub type ArrayRef = Rc<RefCell<Array>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Int,
    Float,
    Str,
    Array,
    Func,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Int => "int",
            ValueKind::Float => "float",
            ValueKind::Str => "string",
            ValueKind::Array => "array",
            ValueKind::Func => "function",
        })
    }
}

/// Runtime value. There is no boolean: truth is `Int(1)` / `Int(0)`.
#[derive(Clone)]
pub enum Value {
    Int(Int),
    Float(f64),
    Str(PyStr),
    /// Shared by reference: every copy of the value aliases one array.
    Array(ArrayRef),
    Func(Arc<FunctionDef>),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(Int::Small(v))
    }

    pub fn bool(b: bool) -> Value {
        Value::int(b as i64)
    }

    pub fn str(s: &str) -> Value {
        Value::Str(PyStr::new(s))
    }

    pub fn new_array(array: Array) -> Value {
        Value::Array(Rc::new(RefCell::new(array)))
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Float(_) => ValueKind::Float,
            Value::Str(_) => ValueKind::Str,
            Value::Array(_) => ValueKind::Array,
            Value::Func(_) => ValueKind::Func,
        }
    }

    pub fn as_int(&self) -> Option<&Int> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s.as_str()),
            _ => None,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => f.write_str(&format_float(*x)),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Array(a) => {
                f.write_str("[")?;
                for (i, (k, v)) in a.borrow().sorted_entries().iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match v {
                        // nested arrays may be cyclic
                        Value::Array(inner) => write!(f, "{k}: <array of {}>", inner.borrow().len())?,
                        _ => write!(f, "{k}: {v:?}")?,
                    }
                }
                f.write_str("]")
            }
            Value::Func(func) => write!(f, "<function {}>", func.name),
        }
    }
}
