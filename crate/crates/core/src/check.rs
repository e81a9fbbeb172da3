//! Static validation: declaration rules, grammar shape and type annotations.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::ast::*;
use crate::typing;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    /// Node path from the root, e.g. `funcs[1].body[0].cond`.
    pub path: String,
    pub message: String,
}

/// Codes describing structural problems, as opposed to type annotation
/// mismatches. A program with any of these cannot be meaningfully judged.
const SHAPE_CODES: &[&str] = &[
    "missing-main",
    "duplicate-name",
    "invalid-lhs",
    "loop-control-outside-loop",
    "unknown-function",
    "arity-mismatch",
    "undeclared-variable",
    "unknown-record",
    "unknown-field",
];

impl Diagnostic {
    pub fn is_shape_error(&self) -> bool {
        self.severity == Severity::Error && SHAPE_CODES.contains(&self.code)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path, self.code, self.message)
    }
}

/// Signature of `__main__`: the typed I/O schema of a task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntrySchema {
    pub params: Vec<VarDecl>,
    pub return_type: TypeTag,
}

impl EntrySchema {
    pub fn param_types(&self) -> Vec<TypeTag> {
        self.params.iter().map(|p| p.ty.clone()).collect()
    }
}

impl fmt::Display for EntrySchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
        write!(f, "{} {}({})", self.return_type, MAIN, params.join(", "))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("program has no {MAIN} function")]
    MissingMain,
}

pub fn entry_schema(p: &Program) -> Result<EntrySchema, CheckError> {
    let main = p.main().ok_or(CheckError::MissingMain)?;
    Ok(EntrySchema { params: main.params.clone(), return_type: main.return_type.clone() })
}

/// Validates a program. The result is empty iff the program is clean; the
/// order of diagnostics is deterministic (document order).
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut c = Checker::new(p);
    c.run();
    c.diags
}

/// Validation plus advisory warnings (currently: locals that are never
/// referenced).
pub fn lint(p: &Program) -> Vec<Diagnostic> {
    let mut diags = validate(p);
    for (fi, f) in p.funcs.iter().enumerate() {
        let mut used = HashSet::new();
        let probe = Program { records: vec![], funcs: vec![f.clone()] };
        traverse(&probe, &mut |n: NodeRef<'_>| match n {
            NodeRef::Expr(Expr::Var { name, .. }) => {
                used.insert(name.clone());
            }
            NodeRef::Stmt(Stmt::Foreach { var, .. }) => {
                used.insert(var.name.clone());
            }
            _ => {}
        });
        for (li, l) in f.locals.iter().enumerate() {
            if !used.contains(&l.name) {
                diags.push(Diagnostic {
                    severity: Severity::Warning,
                    code: "unused-local",
                    path: format!("funcs[{fi}].locals[{li}]"),
                    message: format!("local {} is never used", l.name),
                });
            }
        }
    }
    diags
}

struct Scope<'a> {
    vars: HashMap<&'a str, &'a TypeTag>,
    return_type: &'a TypeTag,
}

struct Checker<'a> {
    program: &'a Program,
    funcs: HashMap<&'a str, &'a FuncDecl>,
    records: HashMap<&'a str, &'a RecordDecl>,
    diags: Vec<Diagnostic>,
    path: Vec<String>,
    this_type: TypeTag,
}

impl<'a> Checker<'a> {
    fn new(program: &'a Program) -> Self {
        let mut funcs = HashMap::new();
        for f in &program.funcs {
            funcs.entry(f.name.as_str()).or_insert(f);
        }
        let mut records = HashMap::new();
        for r in &program.records {
            records.entry(r.name.as_str()).or_insert(r);
        }
        Checker { program, funcs, records, diags: vec![], path: vec![], this_type: TypeTag::Void }
    }

    fn report(&mut self, code: &'static str, message: String) {
        self.diags.push(Diagnostic { severity: Severity::Error, code, path: self.path.concat(), message });
    }

    fn at<R>(&mut self, segment: String, f: impl FnOnce(&mut Self) -> R) -> R {
        self.path.push(segment);
        let r = f(self);
        self.path.pop();
        r
    }

    fn run(&mut self) {
        let p = self.program;
        let mut seen = HashSet::new();
        for (i, r) in p.records.iter().enumerate() {
            self.at(format!("types[{i}]"), |c| {
                if !seen.insert(r.name.as_str()) {
                    c.report("duplicate-name", format!("record {} declared twice", r.name));
                }
                for (name, v) in &r.fields {
                    if *name != v.name {
                        c.report("duplicate-name", format!("field key {name} differs from its declaration {}", v.name));
                    }
                    c.check_type(&v.ty);
                }
            });
        }
        let mut seen = HashSet::new();
        for (i, f) in p.funcs.iter().enumerate() {
            self.at(format!("funcs[{i}]"), |c| {
                if !seen.insert(f.name.as_str()) {
                    c.report("duplicate-name", format!("function {} declared twice", f.name));
                }
                c.check_func(f);
            });
        }
        if p.main().is_none() {
            self.at("funcs".into(), |c| {
                c.report("missing-main", format!("no {MAIN} entry point"));
            });
        }
    }

    fn check_type(&mut self, ty: &TypeTag) {
        match ty {
            TypeTag::Record(name) if !self.records.contains_key(name.as_str()) => {
                self.report("unknown-record", format!("record type {name}# is not declared"));
            }
            TypeTag::Array(e) | TypeTag::Set(e) => {
                if **e == TypeTag::Void {
                    self.report("type-inconsistency", "void cannot be an element type".into());
                }
                self.check_type(e)
            }
            TypeTag::Map(k, v) => {
                if **k == TypeTag::Void || **v == TypeTag::Void {
                    self.report("type-inconsistency", "void cannot be a map component".into());
                }
                self.check_type(k);
                self.check_type(v);
            }
            _ => {}
        }
    }

    fn check_func(&mut self, f: &'a FuncDecl) {
        self.check_type(&f.return_type);
        self.this_type = TypeTag::Void;
        if f.kind == FuncKind::Ctor {
            match &f.return_type {
                TypeTag::Record(_) => self.this_type = f.return_type.clone(),
                t => self.report("ctor-return-type", format!("ctor must return a record, not {t}")),
            }
        }
        let mut vars: HashMap<&str, &TypeTag> = HashMap::new();
        for (kind, decls) in [("params", &f.params), ("locals", &f.locals)] {
            for (i, v) in decls.iter().enumerate() {
                self.at(format!(".{kind}[{i}]"), |c| {
                    if vars.insert(v.name.as_str(), &v.ty).is_some() {
                        c.report("duplicate-name", format!("variable {} declared twice", v.name));
                    }
                    if v.ty == TypeTag::Void {
                        c.report("type-inconsistency", format!("variable {} has type void", v.name));
                    }
                    c.check_type(&v.ty);
                });
            }
        }
        let scope = Scope { vars, return_type: &f.return_type };
        self.at(".body".into(), |c| c.check_block(&f.body, &scope, false));
    }

    fn check_block(&mut self, stmts: &[Stmt], scope: &Scope<'_>, in_loop: bool) {
        for (i, s) in stmts.iter().enumerate() {
            self.at(format!("[{i}]"), |c| c.check_stmt(s, scope, in_loop));
        }
    }

    fn expect_bool(&mut self, e: &Expr, scope: &Scope<'_>, what: &str) {
        let t = self.at(format!(".{what}"), |c| c.check_expr(e, scope));
        if t != TypeTag::Bool {
            self.report("type-inconsistency", format!("{what} must be bool, found {t}"));
        }
    }

    fn check_stmt(&mut self, s: &Stmt, scope: &Scope<'_>, in_loop: bool) {
        match s {
            Stmt::Expr(e) => {
                self.check_expr(e, scope);
            }
            Stmt::If { cond, then_body, else_body, .. } => {
                self.expect_bool(cond, scope, "cond");
                self.at(".then".into(), |c| c.check_block(then_body, scope, in_loop));
                self.at(".else".into(), |c| c.check_block(else_body, scope, in_loop));
            }
            Stmt::Foreach { var, iterable, body, .. } => {
                let it = self.at(".iterable".into(), |c| c.check_expr(iterable, scope));
                match it.iter_elem() {
                    Some(elem) if *elem == var.ty => {}
                    Some(elem) => self.report(
                        "type-inconsistency",
                        format!("loop variable {} is {} but {it} yields {elem}", var.name, var.ty),
                    ),
                    None => self.report("type-inconsistency", format!("cannot iterate over {it}")),
                }
                self.at(".var".into(), |c| match c.lookup(&var.name, scope) {
                    None => c.report("undeclared-variable", format!("loop variable {} is not declared", var.name)),
                    Some(t) if t != var.ty => {
                        c.report("type-inconsistency", format!("{} is declared {t} but used as {}", var.name, var.ty))
                    }
                    Some(_) => {}
                });
                self.at(".body".into(), |c| c.check_block(body, scope, true));
            }
            Stmt::While { cond, body, increment, .. } => {
                self.expect_bool(cond, scope, "cond");
                self.at(".body".into(), |c| c.check_block(body, scope, true));
                self.at(".increment".into(), |c| c.check_block(increment, scope, false));
            }
            Stmt::Break(_) | Stmt::Continue(_) => {
                if !in_loop {
                    let what = if matches!(s, Stmt::Break(_)) { "break" } else { "continue" };
                    self.report("loop-control-outside-loop", format!("{what} outside of a loop"));
                }
            }
            Stmt::Return { expr, .. } => {
                let t = self.at(".expr".into(), |c| c.check_expr(expr, scope));
                if t != *scope.return_type && !(self.this_type != TypeTag::Void && t == self.this_type) {
                    self.report(
                        "return-type-mismatch",
                        format!("returns {t} from a function declared {}", scope.return_type),
                    );
                }
            }
            Stmt::Noop => {}
        }
    }

    /// Resolution order: local or parameter, then `this` inside a ctor, then
    /// a field of the globals record.
    fn lookup(&self, name: &str, scope: &Scope<'_>) -> Option<TypeTag> {
        if let Some(t) = scope.vars.get(name) {
            return Some((*t).clone());
        }
        if name == "this" && self.this_type != TypeTag::Void {
            return Some(self.this_type.clone());
        }
        self.records.get(GLOBALS_RECORD).and_then(|g| g.field(name)).map(|v| v.ty.clone())
    }

    /// Checks an expression and returns its annotated type.
    fn check_expr(&mut self, e: &Expr, scope: &Scope<'_>) -> TypeTag {
        let ty = e.ty().clone();
        self.check_type(&ty);
        match e {
            Expr::Assign { lhs, rhs, .. } => {
                let place_ok = match &**lhs {
                    Expr::Var { .. } | Expr::Field { .. } => true,
                    Expr::Invoke { func, .. } => typing::is_place_builtin(func),
                    _ => false,
                };
                if !place_ok {
                    self.report("invalid-lhs", "assignment target is not a storable place".into());
                }
                let lt = self.at(".lhs".into(), |c| c.check_expr(lhs, scope));
                let rt = self.at(".rhs".into(), |c| c.check_expr(rhs, scope));
                if lt != rt || lt != ty {
                    self.report("type-inconsistency", format!("assignment of {rt} to {lt} annotated {ty}"));
                }
            }
            Expr::Var { name, .. } => match self.lookup(name, scope) {
                None => self.report("undeclared-variable", format!("{name} is not declared")),
                Some(t) if t != ty => {
                    self.report("type-inconsistency", format!("{name} is declared {t} but annotated {ty}"))
                }
                Some(_) => {}
            },
            Expr::Field { object, field, .. } => {
                let ot = self.at(".object".into(), |c| c.check_expr(object, scope));
                match &ot {
                    TypeTag::Record(r) => match self.records.get(r.as_str()).map(|d| d.field(field)) {
                        Some(Some(decl)) if decl.ty != ty => self.report(
                            "type-inconsistency",
                            format!("field {r}.{field} is {} but annotated {ty}", decl.ty),
                        ),
                        Some(Some(_)) => {}
                        Some(None) => self.report("unknown-field", format!("record {r} has no field {field}")),
                        None => {}
                    },
                    t => self.report("type-inconsistency", format!("field access on non-record {t}")),
                }
            }
            Expr::Const { value, .. } => {
                let ok = matches!(
                    (value, &ty),
                    (Literal::Bool(_), TypeTag::Bool)
                        | (Literal::Int(_), TypeTag::Int)
                        | (Literal::Real(_), TypeTag::Real)
                        | (Literal::Char(_), TypeTag::Char)
                ) || (matches!(value, Literal::Str(_)) && ty == TypeTag::string());
                if !ok {
                    self.report("type-inconsistency", format!("literal does not fit {ty}"));
                }
            }
            Expr::Invoke { func, args, .. } => {
                let arg_types: Vec<TypeTag> = args
                    .iter()
                    .enumerate()
                    .map(|(i, a)| self.at(format!(".args[{i}]"), |c| c.check_expr(a, scope)))
                    .collect();
                self.check_call(func, &arg_types, &ty);
            }
            Expr::Ternary { cond, then, els, .. } => {
                self.expect_bool(cond, scope, "cond");
                let tt = self.at(".then".into(), |c| c.check_expr(then, scope));
                let et = self.at(".else".into(), |c| c.check_expr(els, scope));
                if tt != ty || et != ty {
                    self.report("type-inconsistency", format!("branches are {tt} and {et} but annotated {ty}"));
                }
            }
            Expr::Cast { expr, .. } => {
                let from = self.at(".expr".into(), |c| c.check_expr(expr, scope));
                if !typing::cast_allowed(&from, &ty) {
                    self.report("type-inconsistency", format!("cannot cast {from} to {ty}"));
                }
            }
        }
        ty
    }

    fn check_call(&mut self, func: &str, args: &[TypeTag], ty: &TypeTag) {
        if let Some(decl) = self.funcs.get(func).copied() {
            if decl.params.len() != args.len() {
                self.report(
                    "arity-mismatch",
                    format!("{func} takes {} arguments, given {}", decl.params.len(), args.len()),
                );
                return;
            }
            for (i, (p, a)) in decl.params.iter().zip(args).enumerate() {
                if p.ty != *a {
                    self.report("type-inconsistency", format!("argument {i} of {func} expects {}, given {a}", p.ty));
                }
            }
            if decl.return_type != *ty {
                self.report("type-inconsistency", format!("{func} returns {} but is annotated {ty}", decl.return_type));
            }
            return;
        }
        if !typing::is_builtin(func) {
            self.report("unknown-function", format!("{func} is neither declared nor a builtin"));
            return;
        }
        let arities = typing::builtin_arities(func);
        if !arities.contains(&args.len()) {
            self.report("arity-mismatch", format!("{func} takes {arities:?} arguments, given {}", args.len()));
            return;
        }
        if let Err(msg) = typing::check_invoke(func, args, ty) {
            self.report("type-inconsistency", msg);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn main_returning(body: Vec<Stmt>, locals: Vec<VarDecl>) -> Program {
        Program {
            records: vec![],
            funcs: vec![FuncDecl {
                kind: FuncKind::Func,
                return_type: TypeTag::Int,
                name: MAIN.into(),
                params: vec![VarDecl::new(TypeTag::Int, "var0")],
                locals,
                body,
            }],
        }
    }

    fn codes(p: &Program) -> Vec<&'static str> {
        validate(p).iter().map(|d| d.code).collect()
    }

    #[test]
    fn clean_program() {
        let p = main_returning(vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::var(TypeTag::Int, "var0") }], vec![]);
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn undeclared_variable() {
        let p = main_returning(vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::var(TypeTag::Int, "var9") }], vec![]);
        let d = validate(&p);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "undeclared-variable");
        assert_eq!(d[0].path, "funcs[0].body[0].expr");
        assert!(d[0].is_shape_error());
    }

    #[test]
    fn missing_main() {
        let mut p = main_returning(vec![], vec![]);
        p.funcs[0].name = "helper".into();
        assert_eq!(codes(&p), ["missing-main"]);
        assert_eq!(entry_schema(&p), Err(CheckError::MissingMain));
    }

    #[test]
    fn break_outside_loop() {
        let p = main_returning(vec![Stmt::Break(TypeTag::Void)], vec![]);
        assert_eq!(codes(&p), ["loop-control-outside-loop"]);
        let inside = main_returning(
            vec![Stmt::While {
                ty: TypeTag::Void,
                cond: Expr::bool(true),
                body: vec![Stmt::Break(TypeTag::Void)],
                increment: vec![Stmt::Continue(TypeTag::Void)],
            }],
            vec![],
        );
        // continue in the increment list is not inside the loop body
        assert_eq!(codes(&inside), ["loop-control-outside-loop"]);
    }

    #[test]
    fn return_type_mismatch() {
        let p = main_returning(vec![Stmt::Return { ty: TypeTag::Bool, expr: Expr::bool(true) }], vec![]);
        assert_eq!(codes(&p), ["return-type-mismatch"]);
    }

    #[test]
    fn operator_typing() {
        let bad = Expr::invoke(TypeTag::Int, "+", vec![Expr::int(1), Expr::bool(true)]);
        let p = main_returning(vec![Stmt::Return { ty: TypeTag::Int, expr: bad }], vec![]);
        assert_eq!(codes(&p), ["type-inconsistency"]);
        assert!(!validate(&p)[0].is_shape_error());
    }

    #[test]
    fn non_place_assignment_target() {
        let lhs = Expr::invoke(TypeTag::Int, "+", vec![Expr::int(1), Expr::int(2)]);
        let p = main_returning(vec![Stmt::Expr(Expr::assign(lhs, Expr::int(3)))], vec![]);
        assert_eq!(codes(&p), ["invalid-lhs"]);
    }

    #[test]
    fn globals_resolve_after_locals() {
        let mut p = main_returning(vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::var(TypeTag::Int, "g") }], vec![]);
        assert_eq!(codes(&p), ["undeclared-variable"]);
        p.records.push(RecordDecl {
            name: GLOBALS_RECORD.into(),
            fields: vec![("g".into(), VarDecl::new(TypeTag::Int, "g"))],
        });
        assert!(validate(&p).is_empty());
        // a local of another type shadows the global
        p.funcs[0].locals.push(VarDecl::new(TypeTag::Bool, "g"));
        assert_eq!(codes(&p), ["type-inconsistency"]);
    }

    #[test]
    fn user_calls_are_checked() {
        let helper = FuncDecl {
            kind: FuncKind::Func,
            return_type: TypeTag::Int,
            name: "func0".into(),
            params: vec![VarDecl::new(TypeTag::Int, "a")],
            locals: vec![],
            body: vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::var(TypeTag::Int, "a") }],
        };
        let call = Expr::invoke(TypeTag::Int, "func0", vec![Expr::int(1), Expr::int(2)]);
        let mut p = main_returning(vec![Stmt::Return { ty: TypeTag::Int, expr: call }], vec![]);
        p.funcs.insert(0, helper);
        assert_eq!(codes(&p), ["arity-mismatch"]);
        let unknown = Expr::invoke(TypeTag::Int, "nope", vec![]);
        p.funcs[1].body = vec![Stmt::Return { ty: TypeTag::Int, expr: unknown }];
        assert_eq!(codes(&p), ["unknown-function"]);
    }

    #[test]
    fn ctor_must_return_record() {
        let mut p = main_returning(vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::int(0) }], vec![]);
        p.funcs.push(FuncDecl {
            kind: FuncKind::Ctor,
            return_type: TypeTag::Int,
            name: "mk".into(),
            params: vec![],
            locals: vec![],
            body: vec![],
        });
        assert_eq!(codes(&p), ["ctor-return-type"]);
    }

    #[test]
    fn lint_reports_unused_locals() {
        let p = main_returning(
            vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::var(TypeTag::Int, "var0") }],
            vec![VarDecl::new(TypeTag::Int, "var4")],
        );
        assert!(validate(&p).is_empty());
        let l = lint(&p);
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].severity, Severity::Warning);
        assert_eq!(l[0].to_string(), "funcs[0].locals[0]: unused-local: local var4 is never used");
    }
}
