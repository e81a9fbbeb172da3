//! Human-readable rendering in the style of the published program listings:
//!
//! ```text
//! int __main__(int var0)
//!     vars: int var1
//!     var1 = (var0 % 10)
//!     return var1
//! ```
//!
//! Operator invocations are fully parenthesized and `while` prints as
//! `for(; cond; increment)`. The output is one-way; there is no parser for it.

use std::fmt::Write;

use crate::ast::*;
use crate::typing::{is_binary_operator, is_unary_operator};

const INDENT: &str = "    ";

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for r in &p.records {
        let fields: Vec<String> = r.fields.iter().map(|(_, v)| decl(v)).collect();
        line(&mut out, 0, &format!("record {}", r.name));
        line(&mut out, 1, format!("fields: {}", fields.join(", ")).trim_end());
    }
    for f in &p.funcs {
        let params: Vec<String> = f.params.iter().map(decl).collect();
        let prefix = match f.kind {
            FuncKind::Func => "",
            FuncKind::Ctor => "ctor ",
        };
        line(&mut out, 0, &format!("{prefix}{} {}({})", f.return_type, f.name, params.join(", ")));
        let locals: Vec<String> = f.locals.iter().map(decl).collect();
        line(&mut out, 1, format!("vars: {}", locals.join(", ")).trim_end());
        block(&mut out, 1, &f.body);
    }
    out
}

fn decl(v: &VarDecl) -> String {
    format!("{} {}", v.ty, v.name)
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn block(out: &mut String, depth: usize, stmts: &[Stmt]) {
    for s in stmts {
        stmt(out, depth, s);
    }
}

fn stmt(out: &mut String, depth: usize, s: &Stmt) {
    match s {
        Stmt::Expr(e) => line(out, depth, &expr(e)),
        Stmt::If { cond, then_body, else_body, .. } => {
            line(out, depth, &format!("if {}", expr(cond)));
            if then_body.is_empty() {
                line(out, depth + 1, "pass");
            }
            block(out, depth + 1, then_body);
            if !else_body.is_empty() {
                line(out, depth, "else");
                block(out, depth + 1, else_body);
            }
        }
        Stmt::Foreach { var, iterable, body, .. } => {
            line(out, depth, &format!("for {} in {}", var.name, expr(iterable)));
            if body.is_empty() {
                line(out, depth + 1, "pass");
            }
            block(out, depth + 1, body);
        }
        Stmt::While { cond, body, increment, .. } => {
            let incr: Vec<String> = increment.iter().map(inline_stmt).collect();
            line(out, depth, &format!("for(; {}; {})", expr(cond), incr.join(", ")));
            if body.is_empty() {
                line(out, depth + 1, "pass");
            }
            block(out, depth + 1, body);
        }
        _ => line(out, depth, &inline_stmt(s)),
    }
}

/// Single-line rendering, used for simple statements and loop increments.
fn inline_stmt(s: &Stmt) -> String {
    match s {
        Stmt::Expr(e) => expr(e),
        Stmt::Break(_) => "break".into(),
        Stmt::Continue(_) => "continue".into(),
        Stmt::Return { expr: e, .. } => format!("return {}", expr(e)),
        Stmt::Noop => "pass".into(),
        Stmt::If { cond, then_body, else_body, .. } => {
            let then: Vec<String> = then_body.iter().map(inline_stmt).collect();
            let mut text = format!("if {} {{ {} }}", expr(cond), then.join("; "));
            if !else_body.is_empty() {
                let els: Vec<String> = else_body.iter().map(inline_stmt).collect();
                let _ = write!(text, " else {{ {} }}", els.join("; "));
            }
            text
        }
        Stmt::Foreach { var, iterable, body, .. } => {
            let b: Vec<String> = body.iter().map(inline_stmt).collect();
            format!("for {} in {} {{ {} }}", var.name, expr(iterable), b.join("; "))
        }
        Stmt::While { cond, body, increment, .. } => {
            let b: Vec<String> = body.iter().map(inline_stmt).collect();
            let i: Vec<String> = increment.iter().map(inline_stmt).collect();
            format!("for(; {}; {}) {{ {} }}", expr(cond), i.join(", "), b.join("; "))
        }
    }
}

/// Renders one expression.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Assign { lhs, rhs, .. } => format!("{} = {}", expr(lhs), expr(rhs)),
        Expr::Var { name, .. } => name.clone(),
        Expr::Field { object, field, .. } => format!("{}.{}", expr(object), field),
        Expr::Const { value, .. } => literal(value),
        Expr::Invoke { ty, func, args } => invoke(ty, func, args),
        Expr::Ternary { cond, then, els, .. } => {
            format!("{}?{}:{}", expr(cond), expr(then), expr(els))
        }
        Expr::Cast { ty, expr: inner } => format!("({ty})({})", expr(inner)),
    }
}

fn invoke(ty: &TypeTag, func: &str, args: &[Expr]) -> String {
    match (func, args) {
        (op, [a, b]) if is_binary_operator(op) => format!("({} {op} {})", expr(a), expr(b)),
        (op, [a]) if is_unary_operator(op) => format!("({op}{})", expr(a)),
        ("array_index", [a, i]) => format!("{}[{}]", expr(a), expr(i)),
        ("new", []) => format!("new {ty}()"),
        _ => {
            let rendered: Vec<String> = args.iter().map(expr).collect();
            format!("{func}({})", rendered.join(", "))
        }
    }
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Bool(true) => "True".into(),
        Literal::Bool(false) => "False".into(),
        Literal::Int(i) => i.to_string(),
        Literal::Real(r) => format!("{r:?}"),
        Literal::Char(c) => format!("{c:?}"),
        Literal::Str(s) => format!("{s:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_var(n: &str) -> Expr {
        Expr::var(TypeTag::Int, n)
    }

    fn main_with(locals: Vec<VarDecl>, body: Vec<Stmt>) -> Program {
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

    #[test]
    fn renders_builtin_call_in_assignment() {
        let e =
            Expr::assign(int_var("var2"), Expr::invoke(TypeTag::Int, "min", vec![int_var("var0"), int_var("var1")]));
        assert_eq!(expr(&e), "var2 = min(var0, var1)");
    }

    #[test]
    fn while_without_increment() {
        let cond = Expr::invoke(TypeTag::Bool, ">=", vec![int_var("var3"), Expr::int(1)]);
        let p = main_with(vec![], vec![Stmt::While { ty: TypeTag::Void, cond, body: vec![], increment: vec![] }]);
        let text = pretty_print(&p);
        assert!(text.contains("for(; (var3 >= 1); )"), "{text}");
    }

    #[test]
    fn noop_branch_prints_pass() {
        let p = main_with(
            vec![],
            vec![Stmt::If {
                ty: TypeTag::Void,
                cond: Expr::bool(true),
                then_body: vec![Stmt::Break(TypeTag::Void)],
                else_body: vec![Stmt::Noop],
            }],
        );
        let text = pretty_print(&p);
        assert_eq!(text, "int __main__(int var0)\n    vars:\n    if True\n        break\n    else\n        pass\n");
    }

    #[test]
    fn post_increment_index() {
        // var2[(var4 = (var4 + 1) - 1)]
        let bump = Expr::assign(int_var("var4"), Expr::invoke(TypeTag::Int, "+", vec![int_var("var4"), Expr::int(1)]));
        let idx = Expr::invoke(TypeTag::Int, "-", vec![bump, Expr::int(1)]);
        let e = Expr::invoke(TypeTag::Int, "array_index", vec![Expr::var(TypeTag::array(TypeTag::Int), "var2"), idx]);
        assert_eq!(expr(&e), "var2[(var4 = (var4 + 1) - 1)]");
    }

    #[test]
    fn line_counts() {
        let ret = Stmt::Return { ty: TypeTag::Int, expr: int_var("var0") };
        assert_eq!(count_lines(&main_with(vec![], vec![ret])), 3);
        assert_eq!(count_lines(&main_with(vec![], vec![])), 2);
    }

    #[test]
    fn new_container_and_ternary() {
        let n = Expr::invoke(TypeTag::array(TypeTag::Int), "new", vec![]);
        assert_eq!(expr(&n), "new int*()");
        let t = Expr::Ternary {
            ty: TypeTag::Int,
            cond: Box::new(Expr::invoke(TypeTag::Bool, ">", vec![int_var("var2"), int_var("var3")])),
            then: Box::new(int_var("var3")),
            els: Box::new(int_var("var2")),
        };
        assert_eq!(expr(&t), "(var2 > var3)?var3:var2");
    }
}
