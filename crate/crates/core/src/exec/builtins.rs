//! Operators and the library functions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use super::runtime::{ErrorKind, RecordObj, Rt, RtResult, RuntimeError};
use crate::ast::TypeTag;
use crate::value::Value;

/// Heap cell accounting shared by one execution.
pub(crate) struct Heap {
    pub cells: u64,
    pub max: u64,
}

impl Heap {
    pub fn alloc(&mut self, n: u64) -> RtResult<()> {
        self.cells = self.cells.saturating_add(n);
        if self.cells > self.max {
            return Err(RuntimeError::new(
                ErrorKind::HeapLimit,
                format!("more than {} live container cells", self.max),
            ));
        }
        Ok(())
    }

    pub fn free(&mut self, n: u64) {
        self.cells = self.cells.saturating_sub(n);
    }
}

/// Two's-complement 64-bit integer arithmetic. Division truncates toward
/// zero, `%` takes the sign of the dividend and shift amounts are masked to
/// 0..=63.
pub fn int_arith(op: &str, a: i64, b: i64) -> Result<i64, RuntimeError> {
    let div_zero = || RuntimeError::new(ErrorKind::DivByZero, format!("{a} {op} 0"));
    Ok(match op {
        "+" => a.wrapping_add(b),
        "-" => a.wrapping_sub(b),
        "*" => a.wrapping_mul(b),
        "/" => {
            if b == 0 {
                return Err(div_zero());
            }
            a.wrapping_div(b)
        }
        "%" => {
            if b == 0 {
                return Err(div_zero());
            }
            a.wrapping_rem(b)
        }
        "<<" => a.wrapping_shl((b & 63) as u32),
        ">>" => a.wrapping_shr((b & 63) as u32),
        "&" => a & b,
        "|" => a | b,
        _ => return Err(RuntimeError::confusion(format!("{op} is not an integer operator"))),
    })
}

fn real_arith(op: &str, a: f64, b: f64) -> RtResult<f64> {
    Ok(match op {
        "+" => a + b,
        "-" => a - b,
        "*" => a * b,
        "/" => a / b,
        "%" => a % b,
        _ => return Err(RuntimeError::confusion(format!("{op} is not a real operator"))),
    })
}

fn as_real(v: &Rt) -> Option<f64> {
    match v {
        Rt::Int(i) => Some(*i as f64),
        Rt::Real(r) => Some(*r),
        _ => None,
    }
}

fn mismatch(name: &str, args: &[Rt]) -> RuntimeError {
    let kinds: Vec<&str> = args.iter().map(Rt::kind_name).collect();
    RuntimeError::confusion(format!("{name} applied to ({})", kinds.join(", ")))
}

fn wrapping_pow(base: i64, exp: i64) -> RtResult<i64> {
    if exp < 0 {
        return Err(RuntimeError::new(ErrorKind::InvalidArgument, format!("pow({base}, {exp})")));
    }
    let (mut acc, mut b, mut e) = (1i64, base, exp as u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.wrapping_mul(b);
        }
        b = b.wrapping_mul(b);
        e >>= 1;
    }
    Ok(acc)
}

/// Equality as seen by `==`: numeric promotion for scalars, deep equality
/// for containers and records.
pub(crate) fn rt_eq(a: &Rt, b: &Rt) -> RtResult<bool> {
    Ok(match (a, b) {
        (Rt::Bool(x), Rt::Bool(y)) => x == y,
        (Rt::Char(x), Rt::Char(y)) => x == y,
        (Rt::Int(x), Rt::Int(y)) => x == y,
        (x, y) if as_real(x).is_some() && as_real(y).is_some() => as_real(x) == as_real(y),
        (Rt::Void, _) | (_, Rt::Void) => return Err(mismatch("==", &[a.clone(), b.clone()])),
        _ => a.to_value()? == b.to_value()?,
    })
}

fn compare(op: &str, a: &Rt, b: &Rt) -> RtResult<bool> {
    let ord = match (a, b) {
        (Rt::Int(x), Rt::Int(y)) => x.cmp(y),
        (Rt::Char(x), Rt::Char(y)) => x.cmp(y),
        (x, y) => match (as_real(x), as_real(y)) {
            (Some(x), Some(y)) => match x.partial_cmp(&y) {
                Some(o) => o,
                // every ordered comparison involving NaN is false
                None => return Ok(false),
            },
            _ => return Err(mismatch(op, &[a.clone(), b.clone()])),
        },
    };
    Ok(match op {
        "<" => ord == Ordering::Less,
        "<=" => ord != Ordering::Greater,
        ">" => ord == Ordering::Greater,
        _ => ord != Ordering::Less,
    })
}

fn int_arg(name: &str, v: &Rt) -> RtResult<i64> {
    match v {
        Rt::Int(i) => Ok(*i),
        other => Err(RuntimeError::confusion(format!("{name} expects an int, got {}", other.kind_name()))),
    }
}

fn index(len: usize, i: i64) -> RtResult<usize> {
    if i < 0 || i as u64 >= len as u64 {
        return Err(RuntimeError::new(ErrorKind::IndexOutOfBounds, format!("index {i} for length {len}")));
    }
    Ok(i as usize)
}

/// Builds an empty container of type `ty`.
pub(crate) fn new_container(ty: &TypeTag, heap: &mut Heap) -> RtResult<Rt> {
    heap.alloc(1)?;
    Ok(match ty {
        TypeTag::Array(_) => Rt::array(vec![]),
        TypeTag::Set(_) => Rt::Set(Rc::new(RefCell::new(BTreeSet::new()))),
        TypeTag::Map(..) => Rt::Map(Rc::new(RefCell::new(BTreeMap::new()))),
        other => return Err(RuntimeError::confusion(format!("new cannot build {other}"))),
    })
}

pub(crate) fn new_record(name: &str, fields: BTreeMap<String, Rt>) -> Rt {
    Rt::Record(Rc::new(RefCell::new(RecordObj { name: name.to_string(), fields })))
}

/// Applies an operator or library function to evaluated arguments.
/// `new` is handled by the caller since it needs the invocation type.
pub(crate) fn apply(name: &str, args: Vec<Rt>, heap: &mut Heap) -> RtResult<Rt> {
    let out = match (name, args.as_slice()) {
        ("-", [a]) => match a {
            Rt::Int(i) => Rt::Int(i.wrapping_neg()),
            Rt::Real(r) => Rt::Real(-r),
            _ => return Err(mismatch(name, &args)),
        },
        ("!", [Rt::Bool(b)]) => Rt::Bool(!b),
        ("+" | "-" | "*" | "/" | "%", [a, b]) => match (a, b) {
            (Rt::Int(x), Rt::Int(y)) => Rt::Int(int_arith(name, *x, *y)?),
            _ => match (as_real(a), as_real(b)) {
                (Some(x), Some(y)) => Rt::Real(real_arith(name, x, y)?),
                _ => return Err(mismatch(name, &args)),
            },
        },
        ("==", [a, b]) => Rt::Bool(rt_eq(a, b)?),
        ("!=", [a, b]) => Rt::Bool(!rt_eq(a, b)?),
        ("<" | "<=" | ">" | ">=", [a, b]) => Rt::Bool(compare(name, a, b)?),
        ("&", [Rt::Bool(a), Rt::Bool(b)]) => Rt::Bool(*a & *b),
        ("|", [Rt::Bool(a), Rt::Bool(b)]) => Rt::Bool(*a | *b),
        ("&" | "|" | "<<" | ">>", [Rt::Int(a), Rt::Int(b)]) => Rt::Int(int_arith(name, *a, *b)?),
        ("len", [c]) => Rt::Int(match c {
            Rt::Array(a) => a.borrow().len(),
            Rt::Set(s) => s.borrow().len(),
            Rt::Map(m) => m.borrow().len(),
            _ => return Err(mismatch(name, &args)),
        } as i64),
        ("min" | "max", [a, b]) => {
            let pick_first =
                |ord: Ordering| if name == "min" { ord != Ordering::Greater } else { ord != Ordering::Less };
            match (a, b) {
                (Rt::Int(x), Rt::Int(y)) => Rt::Int(if pick_first(x.cmp(y)) { *x } else { *y }),
                _ => match (as_real(a), as_real(b)) {
                    (Some(x), Some(y)) => Rt::Real(if name == "min" { x.min(y) } else { x.max(y) }),
                    _ => return Err(mismatch(name, &args)),
                },
            }
        }
        ("pow", [a, b]) => match (a, b) {
            (Rt::Int(x), Rt::Int(y)) => Rt::Int(wrapping_pow(*x, *y)?),
            _ => match (as_real(a), as_real(b)) {
                (Some(x), Some(y)) => Rt::Real(x.powf(y)),
                _ => return Err(mismatch(name, &args)),
            },
        },
        ("abs", [a]) => match a {
            Rt::Int(i) => Rt::Int(i.wrapping_abs()),
            Rt::Real(r) => Rt::Real(r.abs()),
            _ => return Err(mismatch(name, &args)),
        },
        ("array_push", [Rt::Array(arr), v]) => {
            heap.alloc(1)?;
            arr.borrow_mut().push(v.clone());
            Rt::Array(arr.clone())
        }
        ("array_index", [Rt::Array(arr), i]) => {
            let i = int_arg(name, i)?;
            let arr = arr.borrow();
            arr[index(arr.len(), i)?].clone()
        }
        ("array_pop", [Rt::Array(arr)]) => {
            let v = arr
                .borrow_mut()
                .pop()
                .ok_or_else(|| RuntimeError::new(ErrorKind::IndexOutOfBounds, "array_pop on an empty array"))?;
            heap.free(1);
            v
        }
        ("sort", [Rt::Array(arr)]) => {
            let keyed: Vec<(Value, Rt)> =
                arr.borrow().iter().map(|v| Ok((v.to_value()?, v.clone()))).collect::<RtResult<_>>()?;
            let mut keyed = keyed;
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            *arr.borrow_mut() = keyed.into_iter().map(|(_, v)| v).collect();
            Rt::Array(arr.clone())
        }
        ("concat", [Rt::Array(a), Rt::Array(b)]) => {
            let mut items = a.borrow().clone();
            items.extend(b.borrow().iter().cloned());
            heap.alloc(1 + items.len() as u64)?;
            Rt::array(items)
        }
        ("map_keys", [Rt::Map(m)]) => {
            let keys: Vec<Rt> = m.borrow().keys().map(Rt::from_value).collect();
            heap.alloc(1 + keys.len() as u64)?;
            Rt::array(keys)
        }
        ("map_get", [Rt::Map(m), k]) => {
            let key = k.to_value()?;
            m.borrow()
                .get(&key)
                .cloned()
                .ok_or_else(|| RuntimeError::new(ErrorKind::MissingKey, format!("key {key} not in map")))?
        }
        ("map_put", [Rt::Map(m), k, v]) => {
            if m.borrow_mut().insert(k.to_value()?, v.clone()).is_none() {
                heap.alloc(1)?;
            }
            Rt::Map(m.clone())
        }
        ("map_contains", [Rt::Map(m), k]) => Rt::Bool(m.borrow().contains_key(&k.to_value()?)),
        ("set_add", [Rt::Set(s), v]) => {
            if s.borrow_mut().insert(v.to_value()?) {
                heap.alloc(1)?;
            }
            Rt::Set(s.clone())
        }
        ("set_contains", [Rt::Set(s), v]) => Rt::Bool(s.borrow().contains(&v.to_value()?)),
        ("string_find", [Rt::Array(h), Rt::Array(n)]) => {
            let chars = |a: &Rc<RefCell<Vec<Rt>>>| -> RtResult<Vec<char>> {
                a.borrow()
                    .iter()
                    .map(|c| match c {
                        Rt::Char(c) => Ok(*c),
                        _ => Err(RuntimeError::confusion("string_find expects char arrays")),
                    })
                    .collect()
            };
            Rt::Int(find(&chars(h)?, &chars(n)?))
        }
        _ => return Err(mismatch(name, &args)),
    };
    Ok(out)
}

/// First index of `needle` in `haystack`, or -1.
fn find(haystack: &[char], needle: &[char]) -> i64 {
    if needle.is_empty() {
        return 0;
    }
    haystack.windows(needle.len()).position(|w| w == needle).map_or(-1, |i| i as i64)
}

/// Numeric and char conversions.
pub(crate) fn cast(v: Rt, to: &TypeTag) -> RtResult<Rt> {
    let code_to_char = |i: i64| {
        u32::try_from(i)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| RuntimeError::new(ErrorKind::InvalidArgument, format!("{i} is not a character code")))
    };
    Ok(match (to, &v) {
        (TypeTag::Int, Rt::Int(_)) | (TypeTag::Real, Rt::Real(_)) | (TypeTag::Char, Rt::Char(_)) => v,
        (TypeTag::Int, Rt::Real(r)) => Rt::Int(*r as i64),
        (TypeTag::Int, Rt::Char(c)) => Rt::Int(*c as i64),
        (TypeTag::Real, Rt::Int(i)) => Rt::Real(*i as f64),
        (TypeTag::Real, Rt::Char(c)) => Rt::Real(*c as u32 as f64),
        (TypeTag::Char, Rt::Int(i)) => Rt::Char(code_to_char(*i)?),
        (TypeTag::Char, Rt::Real(r)) => Rt::Char(code_to_char(*r as i64)?),
        (TypeTag::Bool, Rt::Bool(_)) => v,
        (t, _) if !t.is_numeric() && !matches!(t, TypeTag::Char | TypeTag::Bool) => v,
        _ => return Err(RuntimeError::confusion(format!("cannot cast {} to {to}", v.kind_name()))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncating_division_oracle() {
        // reference: q = trunc(a / b) computed in exact rationals, r = a - b*q
        for a in -20i64..=20 {
            for b in (-7i64..=7).filter(|b| *b != 0) {
                let q = {
                    let exact = a as f64 / b as f64;
                    exact.trunc() as i64
                };
                assert_eq!(int_arith("/", a, b).unwrap(), q, "{a}/{b}");
                assert_eq!(int_arith("%", a, b).unwrap(), a - b * q, "{a}%{b}");
            }
        }
        assert_eq!(int_arith("%", -7, 3).unwrap(), -1);
        assert_eq!(int_arith("/", 12, 3).unwrap(), 4);
    }

    #[test]
    fn wrapping_and_shifts() {
        assert_eq!(int_arith("+", i64::MAX, 1).unwrap(), i64::MIN);
        assert_eq!(int_arith("/", i64::MIN, -1).unwrap(), i64::MIN);
        assert_eq!(int_arith("<<", 2, 3).unwrap(), 16);
        assert_eq!(int_arith("<<", 1, 64).unwrap(), 1);
        assert_eq!(int_arith(">>", -16, 2).unwrap(), -4);
        assert_eq!(int_arith("/", 1, 0).unwrap_err().kind, ErrorKind::DivByZero);
        assert_eq!(int_arith("%", 1, 0).unwrap_err().kind, ErrorKind::DivByZero);
    }

    #[test]
    fn brute_force_find_oracle() {
        let hay: Vec<char> = "abcab".chars().collect();
        for needle in ["cab", "ab", "b", "", "abcabc", "x", "bca"] {
            let n: Vec<char> = needle.chars().collect();
            let mut expected = -1;
            for start in 0..=hay.len() {
                if start + n.len() <= hay.len() && hay[start..start + n.len()] == n[..] {
                    expected = start as i64;
                    break;
                }
            }
            assert_eq!(find(&hay, &n), expected, "{needle}");
        }
        assert_eq!(find(&hay, &['c', 'a', 'b']), 2);
    }

    #[test]
    fn pow_rules() {
        assert_eq!(wrapping_pow(2, 3).unwrap(), 8);
        assert_eq!(wrapping_pow(-3, 3).unwrap(), -27);
        assert_eq!(wrapping_pow(7, 0).unwrap(), 1);
        assert_eq!(wrapping_pow(2, 64).unwrap(), 0);
        assert_eq!(wrapping_pow(2, -1).unwrap_err().kind, ErrorKind::InvalidArgument);
    }

    #[test]
    fn heap_limit() {
        let mut heap = Heap { cells: 0, max: 2 };
        let arr = new_container(&TypeTag::array(TypeTag::Int), &mut heap).unwrap();
        apply("array_push", vec![arr.clone(), Rt::Int(1)], &mut heap).unwrap();
        let err = apply("array_push", vec![arr, Rt::Int(2)], &mut heap).unwrap_err();
        assert_eq!(err.kind, ErrorKind::HeapLimit);
    }

    #[test]
    fn casts_between_scalars() {
        assert!(matches!(cast(Rt::Real(-2.7), &TypeTag::Int).unwrap(), Rt::Int(-2)));
        assert!(matches!(cast(Rt::Int(97), &TypeTag::Char).unwrap(), Rt::Char('a')));
        assert!(matches!(cast(Rt::Char('a'), &TypeTag::Int).unwrap(), Rt::Int(97)));
        assert_eq!(cast(Rt::Int(-1), &TypeTag::Char).unwrap_err().kind, ErrorKind::InvalidArgument);
    }
}
