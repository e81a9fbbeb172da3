//! The list-based serialized form, encoded as JSON.
//!
//! `{"types": [RECORD...], "funcs": [FUNC...]}` where every node is a JSON
//! array whose first element is its tag (`"func"`, `"assign"`, ...), and type
//! annotations are strings such as `int*` or `<int|char*>`.

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(serde_json::Error),
    #[error("bad type {text:?} at offset {pos}: {msg}")]
    Type { text: String, pos: usize, msg: String },
    #[error("{path}: unknown node tag {tag:?}")]
    UnknownTag { path: String, tag: String },
    #[error("{path}: '{tag}' expects {expected} entries, found {found}")]
    Arity { path: String, tag: String, expected: usize, found: usize },
    #[error("{path}: {msg}")]
    Malformed { path: String, msg: String },
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::Syntax(e)
    }
}

fn malformed(path: &str, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed { path: path.to_string(), msg: msg.into() }
}

// ---------------------------------------------------------------------------
// Types

struct TypeParser<'a> {
    text: &'a str,
    pos: usize,
}

impl TypeParser<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Type { text: self.text.to_string(), pos: self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn parse(&mut self) -> Result<TypeTag, ParseError> {
        let mut ty = self.base()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    ty = TypeTag::array(ty);
                }
                Some('%') => {
                    self.pos += 1;
                    ty = TypeTag::set(ty);
                }
                _ => return Ok(ty),
            }
        }
    }

    fn base(&mut self) -> Result<TypeTag, ParseError> {
        if self.peek() == Some('<') {
            self.pos += 1;
            let key = self.parse()?;
            self.expect('|')?;
            let value = self.parse()?;
            self.expect('>')?;
            return Ok(TypeTag::map(key, value));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '.' || c == '$' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        let word = &self.text[start..self.pos];
        if word.is_empty() {
            return Err(self.err("expected a type"));
        }
        if self.peek() == Some('#') {
            self.pos += 1;
            return Ok(TypeTag::Record(word.to_string()));
        }
        match word {
            "bool" => Ok(TypeTag::Bool),
            "char" => Ok(TypeTag::Char),
            "int" => Ok(TypeTag::Int),
            "real" => Ok(TypeTag::Real),
            "void" => Ok(TypeTag::Void),
            _ => {
                self.pos = start;
                Err(self.err(format!("unknown type name {word:?} (records need a trailing '#')")))
            }
        }
    }
}

/// Parses a type annotation such as `int*`, `<int|char*>` or `point#`.
pub fn parse_type(text: &str) -> Result<TypeTag, ParseError> {
    let mut p = TypeParser { text, pos: 0 };
    let ty = p.parse()?;
    if p.pos != text.len() {
        return Err(p.err("trailing characters"));
    }
    Ok(ty)
}

pub fn emit_type(ty: &TypeTag) -> String {
    ty.to_string()
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses a serialized program document.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let doc: Json = serde_json::from_str(text)?;
    program_from_json(&doc)
}

pub fn program_from_json(doc: &Json) -> Result<Program, ParseError> {
    let obj = doc.as_object().ok_or_else(|| malformed("$", "program must be an object"))?;
    for key in obj.keys() {
        if key != "types" && key != "funcs" {
            return Err(malformed("$", format!("unexpected key {key:?}")));
        }
    }
    let list = |key: &str| -> Result<&[Json], ParseError> {
        match obj.get(key) {
            None => Ok(&[]),
            Some(v) => v.as_array().map(Vec::as_slice).ok_or_else(|| malformed(key, "expected a list")),
        }
    };
    let records = list("types")?
        .iter()
        .enumerate()
        .map(|(i, r)| parse_record(r, &format!("types[{i}]")))
        .collect::<Result<_, _>>()?;
    let funcs = list("funcs")?
        .iter()
        .enumerate()
        .map(|(i, f)| parse_func(f, &format!("funcs[{i}]")))
        .collect::<Result<_, _>>()?;
    Ok(Program { records, funcs })
}

fn node<'a>(v: &'a Json, path: &str) -> Result<(&'a str, &'a [Json]), ParseError> {
    let items = v.as_array().ok_or_else(|| malformed(path, "expected a node list"))?;
    let tag = items
        .first()
        .and_then(Json::as_str)
        .ok_or_else(|| malformed(path, "node list must start with a tag string"))?;
    Ok((tag, items))
}

fn arity(items: &[Json], tag: &str, expected: usize, path: &str) -> Result<(), ParseError> {
    if items.len() != expected {
        return Err(ParseError::Arity { path: path.to_string(), tag: tag.to_string(), expected, found: items.len() });
    }
    Ok(())
}

fn string<'a>(v: &'a Json, path: &str, what: &str) -> Result<&'a str, ParseError> {
    v.as_str().ok_or_else(|| malformed(path, format!("{what} must be a string")))
}

fn type_at(v: &Json, path: &str) -> Result<TypeTag, ParseError> {
    parse_type(string(v, path, "type")?)
}

fn list_at<'a>(v: &'a Json, path: &str) -> Result<&'a [Json], ParseError> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| malformed(path, "expected a list"))
}

fn parse_record(v: &Json, path: &str) -> Result<RecordDecl, ParseError> {
    let (tag, items) = node(v, path)?;
    if tag != "record" {
        return Err(ParseError::UnknownTag { path: path.into(), tag: tag.into() });
    }
    arity(items, tag, 3, path)?;
    let name = string(&items[1], path, "record name")?.to_string();
    let fields_obj = items[2].as_object().ok_or_else(|| malformed(path, "record fields must be an object"))?;
    let mut fields = Vec::with_capacity(fields_obj.len());
    for (field_name, decl) in fields_obj {
        let var = parse_var_decl(decl, &format!("{path}.{field_name}"))?;
        fields.push((field_name.clone(), var));
    }
    Ok(RecordDecl { name, fields })
}

fn parse_var_decl(v: &Json, path: &str) -> Result<VarDecl, ParseError> {
    let (tag, items) = node(v, path)?;
    if tag != "var" {
        return Err(malformed(path, format!("expected 'var', found {tag:?}")));
    }
    arity(items, tag, 3, path)?;
    let ty = type_at(&items[1], path)?;
    let name = string(&items[2], path, "variable name")?;
    if name.is_empty() {
        return Err(malformed(path, "empty variable name"));
    }
    Ok(VarDecl { ty, name: name.to_string() })
}

fn parse_func(v: &Json, path: &str) -> Result<FuncDecl, ParseError> {
    let (tag, items) = node(v, path)?;
    let kind = match tag {
        "func" => FuncKind::Func,
        "ctor" => FuncKind::Ctor,
        _ => return Err(ParseError::UnknownTag { path: path.into(), tag: tag.into() }),
    };
    arity(items, tag, 6, path)?;
    let return_type = type_at(&items[1], path)?;
    let name = string(&items[2], path, "function name")?.to_string();
    let decls = |idx: usize, what: &str| -> Result<Vec<VarDecl>, ParseError> {
        list_at(&items[idx], &format!("{path}.{what}"))?
            .iter()
            .enumerate()
            .map(|(i, d)| parse_var_decl(d, &format!("{path}.{what}[{i}]")))
            .collect()
    };
    let params = decls(3, "params")?;
    let locals = decls(4, "locals")?;
    let body = parse_stmts(&items[5], &format!("{path}.body"))?;
    Ok(FuncDecl { kind, return_type, name, params, locals, body })
}

fn parse_stmts(v: &Json, path: &str) -> Result<Vec<Stmt>, ParseError> {
    list_at(v, path)?.iter().enumerate().map(|(i, s)| parse_stmt(s, &format!("{path}[{i}]"))).collect()
}

fn parse_stmt(v: &Json, path: &str) -> Result<Stmt, ParseError> {
    let (tag, items) = node(v, path)?;
    let stmt = match tag {
        "if" => {
            arity(items, tag, 5, path)?;
            Stmt::If {
                ty: type_at(&items[1], path)?,
                cond: parse_expr(&items[2], &format!("{path}.cond"))?,
                then_body: parse_stmts(&items[3], &format!("{path}.then"))?,
                else_body: parse_stmts(&items[4], &format!("{path}.else"))?,
            }
        }
        "foreach" => {
            arity(items, tag, 5, path)?;
            Stmt::Foreach {
                ty: type_at(&items[1], path)?,
                var: parse_var_decl(&items[2], &format!("{path}.var"))?,
                iterable: parse_expr(&items[3], &format!("{path}.iterable"))?,
                body: parse_stmts(&items[4], &format!("{path}.body"))?,
            }
        }
        "while" => {
            arity(items, tag, 5, path)?;
            Stmt::While {
                ty: type_at(&items[1], path)?,
                cond: parse_expr(&items[2], &format!("{path}.cond"))?,
                body: parse_stmts(&items[3], &format!("{path}.body"))?,
                increment: parse_stmts(&items[4], &format!("{path}.increment"))?,
            }
        }
        "break" => {
            arity(items, tag, 2, path)?;
            Stmt::Break(type_at(&items[1], path)?)
        }
        "continue" => {
            arity(items, tag, 2, path)?;
            Stmt::Continue(type_at(&items[1], path)?)
        }
        "return" => {
            arity(items, tag, 3, path)?;
            Stmt::Return { ty: type_at(&items[1], path)?, expr: parse_expr(&items[2], &format!("{path}.expr"))? }
        }
        "noop" => {
            arity(items, tag, 1, path)?;
            Stmt::Noop
        }
        _ => Stmt::Expr(parse_expr(v, path)?),
    };
    Ok(stmt)
}

fn parse_expr(v: &Json, path: &str) -> Result<Expr, ParseError> {
    let (tag, items) = node(v, path)?;
    let sub = |i: usize, what: &str| parse_expr(&items[i], &format!("{path}.{what}"));
    let expr = match tag {
        "assign" => {
            arity(items, tag, 4, path)?;
            Expr::Assign { ty: type_at(&items[1], path)?, lhs: Box::new(sub(2, "lhs")?), rhs: Box::new(sub(3, "rhs")?) }
        }
        "var" => {
            arity(items, tag, 3, path)?;
            Expr::Var { ty: type_at(&items[1], path)?, name: string(&items[2], path, "variable name")?.to_string() }
        }
        "field" => {
            arity(items, tag, 4, path)?;
            Expr::Field {
                ty: type_at(&items[1], path)?,
                object: Box::new(sub(2, "object")?),
                field: string(&items[3], path, "field name")?.to_string(),
            }
        }
        "val" => {
            arity(items, tag, 3, path)?;
            let ty = type_at(&items[1], path)?;
            let value = parse_literal(&ty, &items[2], path)?;
            Expr::Const { ty, value }
        }
        "invoke" => {
            arity(items, tag, 4, path)?;
            let args = list_at(&items[3], &format!("{path}.args"))?
                .iter()
                .enumerate()
                .map(|(i, a)| parse_expr(a, &format!("{path}.args[{i}]")))
                .collect::<Result<_, _>>()?;
            Expr::Invoke {
                ty: type_at(&items[1], path)?,
                func: string(&items[2], path, "function name")?.to_string(),
                args,
            }
        }
        "?:" => {
            arity(items, tag, 5, path)?;
            Expr::Ternary {
                ty: type_at(&items[1], path)?,
                cond: Box::new(sub(2, "cond")?),
                then: Box::new(sub(3, "then")?),
                els: Box::new(sub(4, "else")?),
            }
        }
        "cast" => {
            arity(items, tag, 3, path)?;
            Expr::Cast { ty: type_at(&items[1], path)?, expr: Box::new(sub(2, "expr")?) }
        }
        _ => return Err(ParseError::UnknownTag { path: path.into(), tag: tag.into() }),
    };
    if let Expr::Assign { lhs, .. } = &expr {
        if !lhs.is_place_shape() {
            return Err(malformed(path, "assignment target must be var, field or invoke"));
        }
    }
    Ok(expr)
}

fn parse_literal(ty: &TypeTag, v: &Json, path: &str) -> Result<Literal, ParseError> {
    let bad = || malformed(path, format!("constant {v} does not fit type {ty}"));
    match ty {
        TypeTag::Bool => v.as_bool().map(Literal::Bool).ok_or_else(bad),
        TypeTag::Int => v.as_i64().map(Literal::Int).ok_or_else(bad),
        TypeTag::Real => v.as_f64().map(Literal::Real).ok_or_else(bad),
        TypeTag::Char => {
            let s = v.as_str().ok_or_else(bad)?;
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(Literal::Char(c)),
                _ => Err(bad()),
            }
        }
        TypeTag::Array(e) if **e == TypeTag::Char => v.as_str().map(|s| Literal::Str(s.to_string())).ok_or_else(bad),
        _ => Err(malformed(path, format!("constants of type {ty} are not supported"))),
    }
}

// ---------------------------------------------------------------------------
// Emission

pub fn program_to_json(p: &Program) -> Json {
    let mut obj = Map::new();
    obj.insert("types".into(), Json::Array(p.records.iter().map(record_json).collect()));
    obj.insert("funcs".into(), Json::Array(p.funcs.iter().map(func_json).collect()));
    Json::Object(obj)
}

/// Serializes a program as a compact JSON document.
pub fn emit_program(p: &Program) -> String {
    program_to_json(p).to_string()
}

/// Serializes a program with one node list per line where it helps reading.
pub fn emit_program_pretty(p: &Program) -> String {
    serde_json::to_string_pretty(&program_to_json(p)).expect("json values always serialize")
}

fn record_json(r: &RecordDecl) -> Json {
    let mut fields = Map::new();
    for (name, v) in &r.fields {
        fields.insert(name.clone(), var_decl_json(v));
    }
    json!(["record", r.name, fields])
}

fn var_decl_json(v: &VarDecl) -> Json {
    json!(["var", emit_type(&v.ty), v.name])
}

fn func_json(f: &FuncDecl) -> Json {
    let kind = match f.kind {
        FuncKind::Func => "func",
        FuncKind::Ctor => "ctor",
    };
    json!([
        kind,
        emit_type(&f.return_type),
        f.name,
        f.params.iter().map(var_decl_json).collect::<Vec<_>>(),
        f.locals.iter().map(var_decl_json).collect::<Vec<_>>(),
        stmts_json(&f.body),
    ])
}

fn stmts_json(stmts: &[Stmt]) -> Json {
    Json::Array(stmts.iter().map(stmt_json).collect())
}

pub fn stmt_json(s: &Stmt) -> Json {
    match s {
        Stmt::Expr(e) => expr_json(e),
        Stmt::If { ty, cond, then_body, else_body } => {
            json!(["if", emit_type(ty), expr_json(cond), stmts_json(then_body), stmts_json(else_body)])
        }
        Stmt::Foreach { ty, var, iterable, body } => {
            json!(["foreach", emit_type(ty), var_decl_json(var), expr_json(iterable), stmts_json(body)])
        }
        Stmt::While { ty, cond, body, increment } => {
            json!(["while", emit_type(ty), expr_json(cond), stmts_json(body), stmts_json(increment)])
        }
        Stmt::Break(ty) => json!(["break", emit_type(ty)]),
        Stmt::Continue(ty) => json!(["continue", emit_type(ty)]),
        Stmt::Return { ty, expr } => json!(["return", emit_type(ty), expr_json(expr)]),
        Stmt::Noop => json!(["noop"]),
    }
}

pub fn expr_json(e: &Expr) -> Json {
    match e {
        Expr::Assign { ty, lhs, rhs } => {
            json!(["assign", emit_type(ty), expr_json(lhs), expr_json(rhs)])
        }
        Expr::Var { ty, name } => json!(["var", emit_type(ty), name]),
        Expr::Field { ty, object, field } => {
            json!(["field", emit_type(ty), expr_json(object), field])
        }
        Expr::Const { ty, value } => json!(["val", emit_type(ty), literal_json(value)]),
        Expr::Invoke { ty, func, args } => {
            json!(["invoke", emit_type(ty), func, args.iter().map(expr_json).collect::<Vec<_>>()])
        }
        Expr::Ternary { ty, cond, then, els } => {
            json!(["?:", emit_type(ty), expr_json(cond), expr_json(then), expr_json(els)])
        }
        Expr::Cast { ty, expr } => json!(["cast", emit_type(ty), expr_json(expr)]),
    }
}

fn literal_json(l: &Literal) -> Json {
    match l {
        Literal::Bool(b) => json!(b),
        Literal::Int(i) => json!(i),
        // Non-finite reals have no JSON number form.
        Literal::Real(r) => serde_json::Number::from_f64(*r).map(Json::Number).unwrap_or(Json::Null),
        Literal::Char(c) => json!(c.to_string()),
        Literal::Str(s) => json!(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_composite_types() {
        assert_eq!(parse_type("int*").unwrap(), TypeTag::array(TypeTag::Int));
        assert_eq!(parse_type("<int|char*>").unwrap(), TypeTag::map(TypeTag::Int, TypeTag::array(TypeTag::Char)));
        assert_eq!(parse_type("point#").unwrap(), TypeTag::record("point"));
        assert_eq!(parse_type("int*%").unwrap(), TypeTag::set(TypeTag::array(TypeTag::Int)));
        assert_eq!(
            parse_type("<point#|int%>*").unwrap(),
            TypeTag::array(TypeTag::map(TypeTag::record("point"), TypeTag::set(TypeTag::Int)))
        );
    }

    #[test]
    fn type_errors_carry_position() {
        match parse_type("<int|char").unwrap_err() {
            ParseError::Type { pos, .. } => assert_eq!(pos, 9),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(parse_type("point"), Err(ParseError::Type { pos: 0, .. })));
        assert!(parse_type("").is_err());
        assert!(parse_type("int**x").is_err());
    }

    #[test]
    fn parses_constant_return() {
        let text = r#"{"types":[],"funcs":[["func","int","__main__",[],[],[["return","int",["val","int",42]]]]]}"#;
        let p = parse_program(text).unwrap();
        assert_eq!(p.funcs[0].body[0], Stmt::Return { ty: TypeTag::Int, expr: Expr::int(42) });
    }

    #[test]
    fn while_keeps_body_and_increment_apart() {
        let text = r#"{"types":[],"funcs":[["func","int","__main__",[],[["var","int","i"]],[
            ["while","void",["val","bool",true],
                [["break","void"]],
                [["assign","int",["var","int","i"],["val","int",1]]]]
        ]]]}"#;
        let p = parse_program(text).unwrap();
        match &p.funcs[0].body[0] {
            Stmt::While { body, increment, .. } => {
                assert_eq!(body, &vec![Stmt::Break(TypeTag::Void)]);
                assert_eq!(increment.len(), 1);
            }
            s => panic!("expected while, got {s:?}"),
        }
    }

    #[test]
    fn missing_locals_is_an_arity_error() {
        let text = r#"{"types":[],"funcs":[["func","int","__main__",[],[["return","int",["val","int",1]]]]]}"#;
        match parse_program(text).unwrap_err() {
            ParseError::Arity { expected: 6, found: 5, .. } => {}
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_tags_are_rejected() {
        let text = r#"{"types":[],"funcs":[["func","int","__main__",[],[],[["goto","int",1]]]]}"#;
        assert!(matches!(parse_program(text), Err(ParseError::UnknownTag { .. })));
        let text = r#"{"types":[],"funcs":[["method","int","f",[],[],[]]]}"#;
        assert!(matches!(parse_program(text), Err(ParseError::UnknownTag { .. })));
    }

    #[test]
    fn noop_has_no_type_entry() {
        assert_eq!(stmt_json(&Stmt::Noop), json!(["noop"]));
        let text = r#"{"types":[],"funcs":[["func","int","f",[],[],[["noop","void"]]]]}"#;
        assert!(matches!(parse_program(text), Err(ParseError::Arity { .. })));
    }

    #[test]
    fn literals_follow_their_type() {
        let real = parse_literal(&TypeTag::Real, &json!(2), "$").unwrap();
        assert_eq!(real, Literal::Real(2.0));
        assert_eq!(literal_json(&real).to_string(), "2.0");
        assert_eq!(parse_literal(&TypeTag::Char, &json!("x"), "$").unwrap(), Literal::Char('x'));
        assert!(parse_literal(&TypeTag::Char, &json!("xy"), "$").is_err());
        assert_eq!(parse_literal(&TypeTag::string(), &json!("abc"), "$").unwrap(), Literal::Str("abc".into()));
        assert!(parse_literal(&TypeTag::Int, &json!(1.5), "$").is_err());
    }

    #[test]
    fn record_field_order_is_preserved() {
        let text = r#"{"types":[["record","pt",{"y":["var","int","y"],"x":["var","real","x"]}]],"funcs":[]}"#;
        let p = parse_program(text).unwrap();
        let names: Vec<_> = p.records[0].fields.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["y", "x"]);
        assert_eq!(emit_program(&p), text);
    }
}
