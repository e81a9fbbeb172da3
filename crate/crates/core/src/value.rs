//! Runtime values as plain data, and their JSON encoding for test files.
//!
//! Encoding: ints as numbers, reals as numbers with a fractional part or
//! exponent, chars and strings as strings, arrays as arrays, sets as
//! `{"set":[...]}`, maps as `{"map":[[k,v],...]}` and records as
//! `{"record":name,"fields":{...}}`. Decoding is driven by the expected type,
//! which disambiguates e.g. `"a"` as a char from `"a"` as a `char*`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::ast::{RecordDecl, TypeTag};

#[derive(Clone, Debug)]
pub enum Value {
    Bool(bool),
    Char(char),
    Int(i64),
    Real(f64),
    Array(Vec<Value>),
    Set(BTreeSet<Value>),
    Map(BTreeMap<Value, Value>),
    Record { name: String, fields: BTreeMap<String, Value> },
}

impl Value {
    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Char(_) => 1,
            Value::Int(_) => 2,
            Value::Real(_) => 3,
            Value::Array(_) => 4,
            Value::Set(_) => 5,
            Value::Map(_) => 6,
            Value::Record { .. } => 7,
        }
    }

    pub fn string(s: &str) -> Value {
        Value::Array(s.chars().map(Value::Char).collect())
    }

    /// Whether the value inhabits `ty`. Record values are checked by name
    /// only.
    pub fn conforms(&self, ty: &TypeTag) -> bool {
        match (self, ty) {
            (Value::Bool(_), TypeTag::Bool)
            | (Value::Char(_), TypeTag::Char)
            | (Value::Int(_), TypeTag::Int)
            | (Value::Real(_), TypeTag::Real) => true,
            (Value::Array(items), TypeTag::Array(e)) => items.iter().all(|v| v.conforms(e)),
            (Value::Set(items), TypeTag::Set(e)) => items.iter().all(|v| v.conforms(e)),
            (Value::Map(m), TypeTag::Map(k, v)) => m.iter().all(|(mk, mv)| mk.conforms(k) && mv.conforms(v)),
            (Value::Record { name, .. }, TypeTag::Record(r)) => name == r,
            _ => false,
        }
    }

    /// Deep equality where real leaves may differ by
    /// `max(rel * |expected|, abs)`. `self` is the expected value.
    pub fn approx_eq(&self, actual: &Value, rel: f64, abs: f64) -> bool {
        match (self, actual) {
            (Value::Real(e), Value::Real(a)) => {
                if e == a || (e.is_nan() && a.is_nan()) {
                    return true;
                }
                (e - a).abs() <= (rel * e.abs()).max(abs)
            }
            (Value::Array(e), Value::Array(a)) => {
                e.len() == a.len() && e.iter().zip(a).all(|(x, y)| x.approx_eq(y, rel, abs))
            }
            (Value::Map(e), Value::Map(a)) => {
                e.len() == a.len()
                    && e.iter()
                        .zip(a)
                        .all(|((ek, ev), (ak, av))| ek.approx_eq(ak, rel, abs) && ev.approx_eq(av, rel, abs))
            }
            (Value::Set(e), Value::Set(a)) => {
                e.len() == a.len() && e.iter().zip(a).all(|(x, y)| x.approx_eq(y, rel, abs))
            }
            (Value::Record { name: en, fields: ef }, Value::Record { name: an, fields: af }) => {
                en == an
                    && ef.len() == af.len()
                    && ef.iter().zip(af).all(|((ek, ev), (ak, av))| ek == ak && ev.approx_eq(av, rel, abs))
            }
            _ => self == actual,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Bool(b) => json!(b),
            Value::Char(c) => json!(c.to_string()),
            Value::Int(i) => json!(i),
            Value::Real(r) => serde_json::Number::from_f64(*r).map(Json::Number).unwrap_or(Json::Null),
            Value::Array(items) => {
                if !items.is_empty() && items.iter().all(|v| matches!(v, Value::Char(_))) {
                    let s: String = items
                        .iter()
                        .map(|v| match v {
                            Value::Char(c) => *c,
                            _ => unreachable!(),
                        })
                        .collect();
                    json!(s)
                } else {
                    Json::Array(items.iter().map(Value::to_json).collect())
                }
            }
            Value::Set(items) => json!({ "set": items.iter().map(Value::to_json).collect::<Vec<_>>() }),
            Value::Map(m) => json!({
                "map": m.iter().map(|(k, v)| json!([k.to_json(), v.to_json()])).collect::<Vec<_>>()
            }),
            Value::Record { name, fields } => {
                let mut f = Map::new();
                for (k, v) in fields {
                    f.insert(k.clone(), v.to_json());
                }
                json!({ "record": name, "fields": f })
            }
        }
    }

    /// Decodes a JSON value against its expected type. `records` supplies
    /// field types for record values.
    pub fn from_json(v: &Json, ty: &TypeTag, records: &[RecordDecl]) -> Result<Value, ValueError> {
        let bad = || ValueError { expected: ty.clone(), found: v.to_string() };
        match ty {
            TypeTag::Bool => v.as_bool().map(Value::Bool).ok_or_else(bad),
            TypeTag::Int => v.as_i64().map(Value::Int).ok_or_else(bad),
            TypeTag::Real => v.as_f64().map(Value::Real).ok_or_else(bad),
            TypeTag::Char => {
                let s = v.as_str().ok_or_else(bad)?;
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(Value::Char(c)),
                    _ => Err(bad()),
                }
            }
            TypeTag::Array(e) => {
                if let (Some(s), TypeTag::Char) = (v.as_str(), &**e) {
                    return Ok(Value::string(s));
                }
                let items = v.as_array().ok_or_else(bad)?;
                items.iter().map(|x| Value::from_json(x, e, records)).collect::<Result<_, _>>().map(Value::Array)
            }
            TypeTag::Set(e) => {
                let items = v.get("set").and_then(Json::as_array).ok_or_else(bad)?;
                items.iter().map(|x| Value::from_json(x, e, records)).collect::<Result<_, _>>().map(Value::Set)
            }
            TypeTag::Map(kt, vt) => {
                let pairs = v.get("map").and_then(Json::as_array).ok_or_else(bad)?;
                let mut m = BTreeMap::new();
                for pair in pairs {
                    match pair.as_array().map(Vec::as_slice) {
                        Some([k, val]) => {
                            m.insert(Value::from_json(k, kt, records)?, Value::from_json(val, vt, records)?);
                        }
                        _ => return Err(bad()),
                    }
                }
                Ok(Value::Map(m))
            }
            TypeTag::Record(name) => {
                if v.get("record").and_then(Json::as_str) != Some(name.as_str()) {
                    return Err(bad());
                }
                let decl = records.iter().find(|r| &r.name == name).ok_or_else(bad)?;
                let given = v.get("fields").and_then(Json::as_object).ok_or_else(bad)?;
                let mut fields = BTreeMap::new();
                for (fname, fdecl) in &decl.fields {
                    let fv = given.get(fname).ok_or_else(bad)?;
                    fields.insert(fname.clone(), Value::from_json(fv, &fdecl.ty, records)?);
                }
                Ok(Value::Record { name: name.clone(), fields })
            }
            TypeTag::Void => Err(bad()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("expected a value of type {expected}, found {found}")]
pub struct ValueError {
    pub expected: TypeTag,
    pub found: String,
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Total order: reals use IEEE total ordering so values can key sets and maps.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Char(a), Value::Char(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            (Value::Array(a), Value::Array(b)) => a.cmp(b),
            (Value::Set(a), Value::Set(b)) => a.cmp(b),
            (Value::Map(a), Value::Map(b)) => a.cmp(b),
            (Value::Record { name: an, fields: af }, Value::Record { name: bn, fields: bf }) => {
                an.cmp(bn).then_with(|| af.cmp(bf))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_decoding() {
        let arr = TypeTag::array(TypeTag::Int);
        assert_eq!(
            Value::from_json(&json!([1, 2]), &arr, &[]).unwrap(),
            Value::Array(vec![Value::Int(1), Value::Int(2)])
        );
        assert_eq!(Value::from_json(&json!("a"), &TypeTag::Char, &[]).unwrap(), Value::Char('a'));
        assert_eq!(Value::from_json(&json!("ab"), &TypeTag::string(), &[]).unwrap(), Value::string("ab"));
        assert_eq!(Value::from_json(&json!(3), &TypeTag::Real, &[]).unwrap(), Value::Real(3.0));
        assert!(Value::from_json(&json!(3.5), &TypeTag::Int, &[]).is_err());
        let m = TypeTag::map(TypeTag::Int, TypeTag::Bool);
        let mv = Value::from_json(&json!({"map": [[2, true], [1, false]]}), &m, &[]).unwrap();
        assert_eq!(mv.to_json(), json!({"map": [[1, false], [2, true]]}));
        let s = TypeTag::set(TypeTag::Int);
        let sv = Value::from_json(&json!({"set": [3, 1, 3]}), &s, &[]).unwrap();
        assert_eq!(sv.to_json(), json!({"set": [1, 3]}));
    }

    #[test]
    fn reals_keep_a_fractional_part() {
        assert_eq!(Value::Real(2.0).to_json().to_string(), "2.0");
    }

    #[test]
    fn tolerance_is_relative_or_absolute() {
        let e = Value::Real(1000.0);
        assert!(e.approx_eq(&Value::Real(1000.0009), 1e-6, 1e-6));
        assert!(!e.approx_eq(&Value::Real(1000.002), 1e-6, 1e-6));
        let z = Value::Real(0.0);
        assert!(z.approx_eq(&Value::Real(5e-7), 1e-6, 1e-6));
        assert!(!Value::Int(1).approx_eq(&Value::Real(1.0), 1e-6, 1e-6));
    }

    #[test]
    fn conformance() {
        let v = Value::Array(vec![Value::Int(1)]);
        assert!(v.conforms(&TypeTag::array(TypeTag::Int)));
        assert!(!v.conforms(&TypeTag::array(TypeTag::Real)));
        assert!(Value::Array(vec![]).conforms(&TypeTag::array(TypeTag::Real)));
    }
}
