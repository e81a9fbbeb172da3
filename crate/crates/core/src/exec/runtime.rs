//! Interpreter-internal values.
//!
//! Containers and records have reference semantics, as in the Java sources
//! the programs were converted from: `array_push(a, x)` as a statement
//! mutates `a`, and passing an array to a function aliases it. Set elements
//! and map keys are stored as immutable [`Value`] snapshots.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    DivByZero,
    IndexOutOfBounds,
    MissingKey,
    StepLimit,
    HeapLimit,
    TypeConfusion,
    NoReturn,
    /// A library function received an argument outside its domain, such as
    /// a negative exponent for an integer `pow`.
    InvalidArgument,
    /// The call depth limit was exceeded.
    StackOverflow,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::DivByZero => "div-by-zero",
            ErrorKind::IndexOutOfBounds => "index-out-of-bounds",
            ErrorKind::MissingKey => "missing-key",
            ErrorKind::StepLimit => "step-limit",
            ErrorKind::HeapLimit => "heap-limit",
            ErrorKind::TypeConfusion => "type-confusion",
            ErrorKind::NoReturn => "no-return",
            ErrorKind::InvalidArgument => "invalid-argument",
            ErrorKind::StackOverflow => "stack-overflow",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub detail: String,
}

impl RuntimeError {
    pub fn new(kind: ErrorKind, detail: impl Into<String>) -> Self {
        RuntimeError { kind, detail: detail.into() }
    }

    pub(crate) fn confusion(detail: impl Into<String>) -> Self {
        RuntimeError::new(ErrorKind::TypeConfusion, detail)
    }
}

pub(crate) type RtResult<T> = Result<T, RuntimeError>;

#[derive(Debug)]
pub(crate) struct RecordObj {
    pub name: String,
    pub fields: BTreeMap<String, Rt>,
}

#[derive(Clone, Debug)]
pub(crate) enum Rt {
    Void,
    Bool(bool),
    Char(char),
    Int(i64),
    Real(f64),
    Array(Rc<RefCell<Vec<Rt>>>),
    Set(Rc<RefCell<BTreeSet<Value>>>),
    Map(Rc<RefCell<BTreeMap<Value, Rt>>>),
    Record(Rc<RefCell<RecordObj>>),
}

impl Rt {
    pub fn array(items: Vec<Rt>) -> Rt {
        Rt::Array(Rc::new(RefCell::new(items)))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Rt::Void => "void",
            Rt::Bool(_) => "bool",
            Rt::Char(_) => "char",
            Rt::Int(_) => "int",
            Rt::Real(_) => "real",
            Rt::Array(_) => "array",
            Rt::Set(_) => "set",
            Rt::Map(_) => "map",
            Rt::Record(_) => "record",
        }
    }

    /// Deep snapshot as a plain value.
    pub fn to_value(&self) -> RtResult<Value> {
        Ok(match self {
            Rt::Void => return Err(RuntimeError::confusion("void value used as data")),
            Rt::Bool(b) => Value::Bool(*b),
            Rt::Char(c) => Value::Char(*c),
            Rt::Int(i) => Value::Int(*i),
            Rt::Real(r) => Value::Real(*r),
            Rt::Array(a) => Value::Array(a.borrow().iter().map(Rt::to_value).collect::<RtResult<_>>()?),
            Rt::Set(s) => Value::Set(s.borrow().clone()),
            Rt::Map(m) => {
                Value::Map(m.borrow().iter().map(|(k, v)| Ok((k.clone(), v.to_value()?))).collect::<RtResult<_>>()?)
            }
            Rt::Record(r) => {
                let r = r.borrow();
                Value::Record {
                    name: r.name.clone(),
                    fields: r.fields.iter().map(|(k, v)| Ok((k.clone(), v.to_value()?))).collect::<RtResult<_>>()?,
                }
            }
        })
    }

    /// Fresh runtime copy of a plain value.
    pub fn from_value(v: &Value) -> Rt {
        match v {
            Value::Bool(b) => Rt::Bool(*b),
            Value::Char(c) => Rt::Char(*c),
            Value::Int(i) => Rt::Int(*i),
            Value::Real(r) => Rt::Real(*r),
            Value::Array(items) => Rt::array(items.iter().map(Rt::from_value).collect()),
            Value::Set(items) => Rt::Set(Rc::new(RefCell::new(items.clone()))),
            Value::Map(m) => {
                Rt::Map(Rc::new(RefCell::new(m.iter().map(|(k, v)| (k.clone(), Rt::from_value(v))).collect())))
            }
            Value::Record { name, fields } => Rt::Record(Rc::new(RefCell::new(RecordObj {
                name: name.clone(),
                fields: fields.iter().map(|(k, v)| (k.clone(), Rt::from_value(v))).collect(),
            }))),
        }
    }

    /// Number of heap cells a fresh copy of `v` occupies.
    pub fn cells_of(v: &Value) -> u64 {
        match v {
            Value::Array(items) => 1 + items.iter().map(|i| 1 + Rt::cells_of(i)).sum::<u64>(),
            Value::Set(items) => 1 + items.len() as u64,
            Value::Map(m) => 1 + m.values().map(|i| 1 + Rt::cells_of(i)).sum::<u64>(),
            Value::Record { fields, .. } => 1 + fields.values().map(Rt::cells_of).sum::<u64>(),
            _ => 0,
        }
    }
}
