//! Typing rules for operators and library functions.
//!
//! Operators are ordinary invocations whose function name is the operator
//! symbol. This table is shared by the validator and the tree decoder, so a
//! decoded program is type-consistent exactly when the validator says so.

use crate::ast::TypeTag;

pub const BINARY_OPERATORS: &[&str] =
    &["+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&", "|", "<<", ">>"];

pub const UNARY_OPERATORS: &[&str] = &["-", "!"];

/// Library functions with their arity. `new` builds an empty container of
/// the invocation's own type.
pub const BUILTINS: &[(&str, usize)] = &[
    ("len", 1),
    ("min", 2),
    ("max", 2),
    ("pow", 2),
    ("abs", 1),
    ("array_push", 2),
    ("array_index", 2),
    ("array_pop", 1),
    ("sort", 1),
    ("concat", 2),
    ("map_keys", 1),
    ("map_get", 2),
    ("map_put", 3),
    ("map_contains", 2),
    ("set_add", 2),
    ("set_contains", 2),
    ("string_find", 2),
    ("new", 0),
];

pub fn is_binary_operator(name: &str) -> bool {
    BINARY_OPERATORS.contains(&name)
}

pub fn is_unary_operator(name: &str) -> bool {
    UNARY_OPERATORS.contains(&name)
}

/// True for operators and library functions, i.e. anything that is not a
/// user-defined function.
pub fn is_builtin(name: &str) -> bool {
    is_binary_operator(name) || is_unary_operator(name) || BUILTINS.iter().any(|(n, _)| *n == name)
}

/// The arities a builtin accepts (`-` is both unary and binary).
pub fn builtin_arities(name: &str) -> Vec<usize> {
    let mut out = vec![];
    if is_unary_operator(name) {
        out.push(1);
    }
    if is_binary_operator(name) {
        out.push(2);
    }
    if let Some((_, n)) = BUILTINS.iter().find(|(n, _)| *n == name) {
        out.push(*n);
    }
    out
}

/// Result of mixed arithmetic: int op int is int, anything involving a real
/// is real.
pub fn numeric_join(a: &TypeTag, b: &TypeTag) -> Option<TypeTag> {
    match (a, b) {
        (TypeTag::Int, TypeTag::Int) => Some(TypeTag::Int),
        (x, y) if x.is_numeric() && y.is_numeric() => Some(TypeTag::Real),
        _ => None,
    }
}

/// Result type of applying builtin `name` to arguments of the given types,
/// or `None` when the application is ill-typed. `new` is excluded: its type
/// is the invocation's annotation (see [`check_invoke`]).
pub fn result_type(name: &str, args: &[TypeTag]) -> Option<TypeTag> {
    use TypeTag::*;
    match (name, args) {
        ("-", [a]) if a.is_numeric() => Some(a.clone()),
        ("!", [Bool]) => Some(Bool),
        ("+" | "-" | "*" | "/" | "%", [a, b]) => numeric_join(a, b),
        ("==" | "!=", [a, b]) if a == b || numeric_join(a, b).is_some() => Some(Bool),
        ("<" | "<=" | ">" | ">=", [a, b]) => {
            if numeric_join(a, b).is_some() || (*a == Char && *b == Char) {
                Some(Bool)
            } else {
                None
            }
        }
        ("&" | "|", [Bool, Bool]) => Some(Bool),
        ("&" | "|" | "<<" | ">>", [Int, Int]) => Some(Int),
        ("len", [c]) if c.is_container() => Some(Int),
        ("min" | "max" | "pow", [a, b]) => numeric_join(a, b),
        ("abs", [a]) if a.is_numeric() => Some(a.clone()),
        ("array_push", [Array(e), v]) if **e == *v => Some(Array(e.clone())),
        ("array_index", [Array(e), Int]) => Some((**e).clone()),
        ("array_pop", [Array(e)]) => Some((**e).clone()),
        ("sort", [Array(e)]) => Some(Array(e.clone())),
        ("concat", [Array(a), Array(b)]) if a == b => Some(Array(a.clone())),
        ("map_keys", [Map(k, _)]) => Some(Array(k.clone())),
        ("map_get", [Map(k, v), key]) if **k == *key => Some((**v).clone()),
        ("map_put", [Map(k, v), key, val]) if **k == *key && **v == *val => Some(Map(k.clone(), v.clone())),
        ("map_contains", [Map(k, _), key]) if **k == *key => Some(Bool),
        ("set_add", [Set(e), v]) if **e == *v => Some(Set(e.clone())),
        ("set_contains", [Set(e), v]) if **e == *v => Some(Bool),
        ("string_find", [a, b]) if *a == TypeTag::string() && *b == TypeTag::string() => Some(Int),
        _ => None,
    }
}

/// Checks a builtin invocation annotated with `node_ty`.
pub fn check_invoke(name: &str, args: &[TypeTag], node_ty: &TypeTag) -> Result<(), String> {
    if name == "new" {
        if !args.is_empty() {
            return Err("new takes no arguments".into());
        }
        if !node_ty.is_container() {
            return Err(format!("new builds containers, not {node_ty}"));
        }
        return Ok(());
    }
    match result_type(name, args) {
        Some(t) if t == *node_ty => Ok(()),
        Some(t) => Err(format!("{name} yields {t} but is annotated {node_ty}")),
        None => {
            let rendered: Vec<String> = args.iter().map(ToString::to_string).collect();
            Err(format!("{name} is not defined for ({})", rendered.join(", ")))
        }
    }
}

/// Cast is permitted between numeric and char types, and as an identity.
pub fn cast_allowed(from: &TypeTag, to: &TypeTag) -> bool {
    let scalar = |t: &TypeTag| matches!(t, TypeTag::Int | TypeTag::Real | TypeTag::Char);
    from == to || (scalar(from) && scalar(to))
}

/// Invocations usable as an assignment target.
pub fn is_place_builtin(name: &str) -> bool {
    matches!(name, "array_index" | "map_get")
}

#[cfg(test)]
mod tests {
    use super::*;
    use TypeTag::*;

    #[test]
    fn arithmetic_promotes_to_real() {
        assert_eq!(result_type("+", &[Int, Int]), Some(Int));
        assert_eq!(result_type("*", &[Int, Real]), Some(Real));
        assert_eq!(result_type("+", &[Int, Char]), None);
    }

    #[test]
    fn ampersand_is_overloaded() {
        assert_eq!(result_type("&", &[Bool, Bool]), Some(Bool));
        assert_eq!(result_type("&", &[Int, Int]), Some(Int));
        assert_eq!(result_type("&", &[Int, Bool]), None);
        assert_eq!(result_type("<<", &[Int, Int]), Some(Int));
    }

    #[test]
    fn container_builtins() {
        let arr = TypeTag::array(Int);
        assert_eq!(result_type("array_index", &[arr.clone(), Int]), Some(Int));
        assert_eq!(result_type("array_index", &[Int, Int]), None);
        assert_eq!(result_type("len", std::slice::from_ref(&arr)), Some(Int));
        let m = TypeTag::map(Int, Real);
        assert_eq!(result_type("map_keys", std::slice::from_ref(&m)), Some(arr));
        assert_eq!(result_type("map_put", &[m.clone(), Int, Real]), Some(m));
        assert!(check_invoke("new", &[], &TypeTag::set(Char)).is_ok());
        assert!(check_invoke("new", &[], &Int).is_err());
    }

    #[test]
    fn minus_has_two_arities() {
        assert_eq!(builtin_arities("-"), vec![1, 2]);
        assert_eq!(builtin_arities("map_put"), vec![3]);
        assert!(builtin_arities("func0").is_empty());
    }

    #[test]
    fn casts() {
        assert!(cast_allowed(&Int, &Real));
        assert!(cast_allowed(&Char, &Int));
        assert!(!cast_allowed(&Bool, &Int));
        assert!(!cast_allowed(&TypeTag::array(Int), &Int));
    }
}
