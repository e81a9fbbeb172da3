//! The UAST abstract syntax.
//!
//! Every node mirrors one production of the list-serialized grammar. All
//! values are plain owned data: cloning yields an independent deep copy and
//! `==` is node-for-node structural equality, type annotations included.

use std::fmt;
use std::hash::{Hash, Hasher};

/// Name of the record that holds global variables.
pub const GLOBALS_RECORD: &str = "__globals__";
/// Name of the optional function initialising the globals record.
pub const GLOBALS_INIT: &str = "__globals__.__init__";
/// Name of the entry point.
pub const MAIN: &str = "__main__";

/// Static type annotation carried by every expression.
///
/// `Void` is not part of the source grammar: it is the internal sentinel
/// used for statements without a meaningful type (`noop`) and serializes as
/// `void` where a type slot must still be filled.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    Void,
    Bool,
    Char,
    Int,
    Real,
    Array(Box<TypeTag>),
    Set(Box<TypeTag>),
    Map(Box<TypeTag>, Box<TypeTag>),
    Record(String),
}

impl TypeTag {
    pub fn array(elem: TypeTag) -> Self {
        TypeTag::Array(Box::new(elem))
    }

    pub fn set(elem: TypeTag) -> Self {
        TypeTag::Set(Box::new(elem))
    }

    pub fn map(key: TypeTag, value: TypeTag) -> Self {
        TypeTag::Map(Box::new(key), Box::new(value))
    }

    pub fn record(name: impl Into<String>) -> Self {
        TypeTag::Record(name.into())
    }

    /// `char*`, the type of string literals.
    pub fn string() -> Self {
        TypeTag::array(TypeTag::Char)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, TypeTag::Int | TypeTag::Real)
    }

    pub fn is_container(&self) -> bool {
        matches!(self, TypeTag::Array(_) | TypeTag::Set(_) | TypeTag::Map(..))
    }

    /// Type of the values produced when iterating a container: elements for
    /// arrays and sets, keys for maps.
    pub fn iter_elem(&self) -> Option<&TypeTag> {
        match self {
            TypeTag::Array(e) | TypeTag::Set(e) => Some(e),
            TypeTag::Map(k, _) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Void => f.write_str("void"),
            TypeTag::Bool => f.write_str("bool"),
            TypeTag::Char => f.write_str("char"),
            TypeTag::Int => f.write_str("int"),
            TypeTag::Real => f.write_str("real"),
            TypeTag::Array(e) => write!(f, "{e}*"),
            TypeTag::Set(e) => write!(f, "{e}%"),
            TypeTag::Map(k, v) => write!(f, "<{k}|{v}>"),
            TypeTag::Record(name) => write!(f, "{name}#"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub records: Vec<RecordDecl>,
    pub funcs: Vec<FuncDecl>,
}

impl Program {
    pub fn func(&self, name: &str) -> Option<&FuncDecl> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn record(&self, name: &str) -> Option<&RecordDecl> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn main(&self) -> Option<&FuncDecl> {
        self.func(MAIN)
    }

    pub fn globals(&self) -> Option<&RecordDecl> {
        self.record(GLOBALS_RECORD)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordDecl {
    pub name: String,
    /// Field declarations in document order; the map key is the field name.
    pub fields: Vec<(String, VarDecl)>,
}

impl RecordDecl {
    pub fn field(&self, name: &str) -> Option<&VarDecl> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FuncKind {
    Func,
    Ctor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDecl {
    pub kind: FuncKind,
    pub return_type: TypeTag,
    pub name: String,
    pub params: Vec<VarDecl>,
    pub locals: Vec<VarDecl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub ty: TypeTag,
    pub name: String,
}

impl VarDecl {
    pub fn new(ty: TypeTag, name: impl Into<String>) -> Self {
        VarDecl { ty, name: name.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Expr(Expr),
    If { ty: TypeTag, cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    Foreach { ty: TypeTag, var: VarDecl, iterable: Expr, body: Vec<Stmt> },
    While { ty: TypeTag, cond: Expr, body: Vec<Stmt>, increment: Vec<Stmt> },
    Break(TypeTag),
    Continue(TypeTag),
    Return { ty: TypeTag, expr: Expr },
    Noop,
}

impl Stmt {
    /// The statement-level type slot; `Void` for `noop`.
    pub fn ty(&self) -> &TypeTag {
        match self {
            Stmt::Expr(e) => e.ty(),
            Stmt::If { ty, .. }
            | Stmt::Foreach { ty, .. }
            | Stmt::While { ty, .. }
            | Stmt::Break(ty)
            | Stmt::Continue(ty)
            | Stmt::Return { ty, .. } => ty,
            Stmt::Noop => &TypeTag::Void,
        }
    }
}

/// Literal payload of a `val` node.
#[derive(Clone, Debug)]
pub enum Literal {
    Bool(bool),
    Int(i64),
    Real(f64),
    Char(char),
    Str(String),
}

// Reals compare by bit pattern so that structural equality stays an
// equivalence relation (NaN == NaN, 0.0 != -0.0).
impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Bool(a), Literal::Bool(b)) => a == b,
            (Literal::Int(a), Literal::Int(b)) => a == b,
            (Literal::Real(a), Literal::Real(b)) => a.to_bits() == b.to_bits(),
            (Literal::Char(a), Literal::Char(b)) => a == b,
            (Literal::Str(a), Literal::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Literal::Bool(b) => b.hash(state),
            Literal::Int(i) => i.hash(state),
            Literal::Real(r) => r.to_bits().hash(state),
            Literal::Char(c) => c.hash(state),
            Literal::Str(s) => s.hash(state),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Assign { ty: TypeTag, lhs: Box<Expr>, rhs: Box<Expr> },
    Var { ty: TypeTag, name: String },
    Field { ty: TypeTag, object: Box<Expr>, field: String },
    Const { ty: TypeTag, value: Literal },
    Invoke { ty: TypeTag, func: String, args: Vec<Expr> },
    Ternary { ty: TypeTag, cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
    Cast { ty: TypeTag, expr: Box<Expr> },
}

impl Expr {
    pub fn ty(&self) -> &TypeTag {
        match self {
            Expr::Assign { ty, .. }
            | Expr::Var { ty, .. }
            | Expr::Field { ty, .. }
            | Expr::Const { ty, .. }
            | Expr::Invoke { ty, .. }
            | Expr::Ternary { ty, .. }
            | Expr::Cast { ty, .. } => ty,
        }
    }

    pub fn var(ty: TypeTag, name: impl Into<String>) -> Self {
        Expr::Var { ty, name: name.into() }
    }

    pub fn int(v: i64) -> Self {
        Expr::Const { ty: TypeTag::Int, value: Literal::Int(v) }
    }

    pub fn bool(v: bool) -> Self {
        Expr::Const { ty: TypeTag::Bool, value: Literal::Bool(v) }
    }

    pub fn invoke(ty: TypeTag, func: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::Invoke { ty, func: func.into(), args }
    }

    pub fn assign(lhs: Expr, rhs: Expr) -> Self {
        Expr::Assign { ty: lhs.ty().clone(), lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// True for node shapes that may appear on the left of an assignment.
    pub fn is_place_shape(&self) -> bool {
        matches!(self, Expr::Var { .. } | Expr::Field { .. } | Expr::Invoke { .. })
    }
}

/// Structural equality: node-for-node identical, including type tags.
pub fn structural_eq(a: &Program, b: &Program) -> bool {
    a == b
}

/// A borrowed view of any node below the program root.
#[derive(Clone, Copy, Debug)]
pub enum NodeRef<'a> {
    Record(&'a RecordDecl),
    Func(&'a FuncDecl),
    Var(&'a VarDecl),
    Stmt(&'a Stmt),
    Expr(&'a Expr),
}

impl NodeRef<'_> {
    /// Short kind label, e.g. `func`, `return`, `val`.
    pub fn kind(&self) -> &'static str {
        match self {
            NodeRef::Record(_) => "record",
            NodeRef::Func(f) => match f.kind {
                FuncKind::Func => "func",
                FuncKind::Ctor => "ctor",
            },
            NodeRef::Var(_) => "var-decl",
            NodeRef::Stmt(s) => match s {
                Stmt::Expr(_) => "expr-stmt",
                Stmt::If { .. } => "if",
                Stmt::Foreach { .. } => "foreach",
                Stmt::While { .. } => "while",
                Stmt::Break(_) => "break",
                Stmt::Continue(_) => "continue",
                Stmt::Return { .. } => "return",
                Stmt::Noop => "noop",
            },
            NodeRef::Expr(e) => match e {
                Expr::Assign { .. } => "assign",
                Expr::Var { .. } => "var",
                Expr::Field { .. } => "field",
                Expr::Const { .. } => "val",
                Expr::Invoke { .. } => "invoke",
                Expr::Ternary { .. } => "?:",
                Expr::Cast { .. } => "cast",
            },
        }
    }
}

pub trait Visitor<'a> {
    fn visit(&mut self, node: NodeRef<'a>);
}

impl<'a, F: FnMut(NodeRef<'a>)> Visitor<'a> for F {
    fn visit(&mut self, node: NodeRef<'a>) {
        self(node)
    }
}

/// Pre-order traversal of every node below the program root. Children are
/// visited in serialized field order.
///
/// An expression statement is the expression itself in the serialized form,
/// so it is visited once, as its expression.
pub fn traverse<'a, V: Visitor<'a>>(p: &'a Program, visitor: &mut V) {
    for r in &p.records {
        visitor.visit(NodeRef::Record(r));
        for (_, v) in &r.fields {
            visitor.visit(NodeRef::Var(v));
        }
    }
    for f in &p.funcs {
        visitor.visit(NodeRef::Func(f));
        for v in f.params.iter().chain(&f.locals) {
            visitor.visit(NodeRef::Var(v));
        }
        walk_stmts(&f.body, visitor);
    }
}

fn walk_stmts<'a, V: Visitor<'a>>(stmts: &'a [Stmt], visitor: &mut V) {
    for s in stmts {
        walk_stmt(s, visitor);
    }
}

fn walk_stmt<'a, V: Visitor<'a>>(s: &'a Stmt, visitor: &mut V) {
    if let Stmt::Expr(e) = s {
        walk_expr(e, visitor);
        return;
    }
    visitor.visit(NodeRef::Stmt(s));
    match s {
        Stmt::If { cond, then_body, else_body, .. } => {
            walk_expr(cond, visitor);
            walk_stmts(then_body, visitor);
            walk_stmts(else_body, visitor);
        }
        Stmt::Foreach { var, iterable, body, .. } => {
            visitor.visit(NodeRef::Var(var));
            walk_expr(iterable, visitor);
            walk_stmts(body, visitor);
        }
        Stmt::While { cond, body, increment, .. } => {
            walk_expr(cond, visitor);
            walk_stmts(body, visitor);
            walk_stmts(increment, visitor);
        }
        Stmt::Return { expr, .. } => walk_expr(expr, visitor),
        Stmt::Expr(_) | Stmt::Break(_) | Stmt::Continue(_) | Stmt::Noop => {}
    }
}

fn walk_expr<'a, V: Visitor<'a>>(e: &'a Expr, visitor: &mut V) {
    visitor.visit(NodeRef::Expr(e));
    match e {
        Expr::Assign { lhs, rhs, .. } => {
            walk_expr(lhs, visitor);
            walk_expr(rhs, visitor);
        }
        Expr::Field { object, .. } => walk_expr(object, visitor),
        Expr::Invoke { args, .. } => {
            for a in args {
                walk_expr(a, visitor);
            }
        }
        Expr::Ternary { cond, then, els, .. } => {
            walk_expr(cond, visitor);
            walk_expr(then, visitor);
            walk_expr(els, visitor);
        }
        Expr::Cast { expr, .. } => walk_expr(expr, visitor),
        Expr::Var { .. } | Expr::Const { .. } => {}
    }
}

/// Number of nodes visited by [`traverse`].
pub fn node_count(p: &Program) -> usize {
    let mut n = 0;
    traverse(p, &mut |_: NodeRef<'_>| n += 1);
    n
}

/// Lines of code: the number of lines of the canonical pretty-printed form.
pub fn count_lines(p: &Program) -> usize {
    crate::pretty::pretty_print(p).lines().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn return_const_program() -> Program {
        Program {
            records: vec![],
            funcs: vec![FuncDecl {
                kind: FuncKind::Func,
                return_type: TypeTag::Int,
                name: MAIN.into(),
                params: vec![],
                locals: vec![],
                body: vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::int(7) }],
            }],
        }
    }

    #[test]
    fn traverse_visits_func_return_constant() {
        let p = return_const_program();
        let mut kinds = vec![];
        traverse(&p, &mut |n: NodeRef<'_>| kinds.push(n.kind()));
        assert_eq!(kinds, ["func", "return", "val"]);
    }

    #[test]
    fn traverse_empty_program() {
        assert_eq!(node_count(&Program::default()), 0);
    }

    #[test]
    fn structural_eq_basics() {
        let p = return_const_program();
        assert!(structural_eq(&p, &p));
        let copy = p.clone();
        assert!(structural_eq(&p, &copy));

        let mut renamed = p.clone();
        renamed.funcs[0].body = vec![Stmt::Return { ty: TypeTag::Int, expr: Expr::var(TypeTag::Int, "var1") }];
        let mut other = renamed.clone();
        if let Stmt::Return { expr: Expr::Var { name, .. }, .. } = &mut other.funcs[0].body[0] {
            *name = "var2".into();
        }
        assert!(!structural_eq(&renamed, &other));
    }

    #[test]
    fn type_display() {
        assert_eq!(TypeTag::map(TypeTag::Int, TypeTag::string()).to_string(), "<int|char*>");
        assert_eq!(TypeTag::set(TypeTag::record("p")).to_string(), "p#%");
    }

    #[test]
    fn real_literal_equality_is_reflexive() {
        let nan = Literal::Real(f64::NAN);
        assert_eq!(nan, nan.clone());
        assert_ne!(Literal::Real(0.0), Literal::Real(-0.0));
    }
}
