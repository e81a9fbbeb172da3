//! Typed decoding grammar: nonterminals, productions and the restriction
//! knobs that shape the search space.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use crate::ast::*;
use crate::codec;
use crate::typing;

use super::DecodeError;

/// Grammar symbol at a hole. Statement symbols record whether the hole sits
/// inside a loop body, which decides whether `break`/`continue` are legal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nonterminal {
    Block { in_loop: bool },
    Stmt { in_loop: bool },
    Expr(TypeTag),
    Place(TypeTag),
}

impl fmt::Display for Nonterminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonterminal::Block { in_loop: false } => f.write_str("BLOCK"),
            Nonterminal::Block { in_loop: true } => f.write_str("BLOCK@loop"),
            Nonterminal::Stmt { in_loop: false } => f.write_str("STMT"),
            Nonterminal::Stmt { in_loop: true } => f.write_str("STMT@loop"),
            Nonterminal::Expr(t) => write!(f, "EXPR:{t}"),
            Nonterminal::Place(t) => write!(f, "PLACE:{t}"),
        }
    }
}

/// One right-hand side, fully instantiated with the types and names it
/// introduces. Blocks are cons lists: `Cons` holds a statement and the rest
/// of the block, `End` closes it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Production {
    Cons,
    End,
    ExprStmt(TypeTag),
    If,
    Foreach { var: String, iterable: TypeTag },
    While,
    Break,
    Continue,
    Return(TypeTag),
    Noop,
    Assign(TypeTag),
    Var { ty: TypeTag, name: String },
    Field { record: String, field: String, ty: TypeTag },
    Const { ty: TypeTag, value: Literal },
    Invoke { func: String, ret: TypeTag, args: Vec<TypeTag> },
    Ternary(TypeTag),
    Cast { from: TypeTag, to: TypeTag },
}

/// Coarse production kinds, the alternatives of the grammar rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProductionKind {
    Cons,
    End,
    ExprStmt,
    If,
    Foreach,
    While,
    Break,
    Continue,
    Return,
    Noop,
    Assign,
    Var,
    Field,
    Constant,
    Invoke,
    Ternary,
    Cast,
}

impl Production {
    pub fn kind(&self) -> ProductionKind {
        match self {
            Production::Cons => ProductionKind::Cons,
            Production::End => ProductionKind::End,
            Production::ExprStmt(_) => ProductionKind::ExprStmt,
            Production::If => ProductionKind::If,
            Production::Foreach { .. } => ProductionKind::Foreach,
            Production::While => ProductionKind::While,
            Production::Break => ProductionKind::Break,
            Production::Continue => ProductionKind::Continue,
            Production::Return(_) => ProductionKind::Return,
            Production::Noop => ProductionKind::Noop,
            Production::Assign(_) => ProductionKind::Assign,
            Production::Var { .. } => ProductionKind::Var,
            Production::Field { .. } => ProductionKind::Field,
            Production::Const { .. } => ProductionKind::Constant,
            Production::Invoke { .. } => ProductionKind::Invoke,
            Production::Ternary(_) => ProductionKind::Ternary,
            Production::Cast { .. } => ProductionKind::Cast,
        }
    }

    /// Child holes created when this production fills a hole of `parent`.
    pub fn children(&self, parent: &Nonterminal) -> Vec<Nonterminal> {
        use Nonterminal as N;
        let in_loop = matches!(parent, N::Block { in_loop: true } | N::Stmt { in_loop: true });
        let expr = |t: &TypeTag| N::Expr(t.clone());
        match self {
            Production::Cons => vec![N::Stmt { in_loop }, N::Block { in_loop }],
            Production::ExprStmt(t) | Production::Return(t) => vec![expr(t)],
            Production::If => {
                vec![expr(&TypeTag::Bool), N::Block { in_loop }, N::Block { in_loop }]
            }
            Production::Foreach { iterable, .. } => vec![expr(iterable), N::Block { in_loop: true }],
            Production::While => {
                vec![expr(&TypeTag::Bool), N::Block { in_loop: true }, N::Block { in_loop: false }]
            }
            Production::Assign(t) => vec![N::Place(t.clone()), expr(t)],
            Production::Field { record, .. } => vec![expr(&TypeTag::record(record.clone()))],
            Production::Invoke { args, .. } => args.iter().map(expr).collect(),
            Production::Ternary(t) => vec![expr(&TypeTag::Bool), expr(t), expr(t)],
            Production::Cast { from, .. } => vec![expr(from)],
            Production::End
            | Production::Break
            | Production::Continue
            | Production::Noop
            | Production::Var { .. }
            | Production::Const { .. } => vec![],
        }
    }

    pub fn arity(&self) -> usize {
        self.children(&Nonterminal::Block { in_loop: false }).len()
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Production::Cons => f.write_str("cons"),
            Production::End => f.write_str("end"),
            Production::ExprStmt(t) => write!(f, "expr:{t}"),
            Production::If => f.write_str("if"),
            Production::Foreach { var, iterable } => write!(f, "foreach {var} in {iterable}"),
            Production::While => f.write_str("while"),
            Production::Break => f.write_str("break"),
            Production::Continue => f.write_str("continue"),
            Production::Return(t) => write!(f, "return:{t}"),
            Production::Noop => f.write_str("noop"),
            Production::Assign(t) => write!(f, "assign:{t}"),
            Production::Var { ty, name } => write!(f, "var {ty} {name}"),
            Production::Field { record, field, .. } => write!(f, "field {record}.{field}"),
            Production::Const { ty, value } => {
                write!(f, "val {ty} {}", codec::expr_json(&Expr::Const { ty: ty.clone(), value: value.clone() })[2])
            }
            Production::Invoke { func, ret, args } => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(f, "invoke {ret} {func}({})", args.join(","))
            }
            Production::Ternary(t) => write!(f, "?:{t}"),
            Production::Cast { from, to } => write!(f, "cast {from}->{to}"),
        }
    }
}

/// Shape of the decoded `__main__` body.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyShape {
    /// Arbitrary statement list.
    Statements,
    /// A single `return <expr>`; only the expression is decoded.
    SingleReturn,
}

/// The fixed part of a decoded program: `__main__`'s signature and locals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub return_type: TypeTag,
    pub params: Vec<VarDecl>,
    pub locals: Vec<VarDecl>,
}

impl Skeleton {
    /// Parses `ret __main__(T a, U b)` optionally followed by
    /// `vars: T c, U d`.
    pub fn parse(text: &str) -> Result<Skeleton, DecodeError> {
        let bad = |m: &str| DecodeError::Skeleton(format!("{m} in {text:?}"));
        let (sig, vars) = match text.find("vars:") {
            Some(i) => (&text[..i], &text[i + "vars:".len()..]),
            None => (text, ""),
        };
        let open = sig.find('(').ok_or_else(|| bad("missing '('"))?;
        let close = sig.rfind(')').ok_or_else(|| bad("missing ')'"))?;
        let head: Vec<&str> = sig[..open].split_whitespace().collect();
        let [ret, name] = head[..] else {
            return Err(bad("expected '<type> __main__'"));
        };
        if name != MAIN {
            return Err(bad("entry point must be __main__"));
        }
        let decls = |list: &str| -> Result<Vec<VarDecl>, DecodeError> {
            list.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|d| {
                    let parts: Vec<&str> = d.split_whitespace().collect();
                    let [ty, name] = parts[..] else {
                        return Err(bad("expected '<type> <name>'"));
                    };
                    let ty = codec::parse_type(ty).map_err(|e| DecodeError::Skeleton(e.to_string()))?;
                    Ok(VarDecl::new(ty, name))
                })
                .collect()
        };
        let return_type = codec::parse_type(ret).map_err(|e| DecodeError::Skeleton(e.to_string()))?;
        Ok(Skeleton { return_type, params: decls(&sig[open + 1..close])?, locals: decls(vars)? })
    }

    pub fn from_main(f: &FuncDecl) -> Skeleton {
        Skeleton { return_type: f.return_type.clone(), params: f.params.clone(), locals: f.locals.clone() }
    }

    fn decls(&self) -> impl Iterator<Item = &VarDecl> {
        self.params.iter().chain(&self.locals)
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ds: &[VarDecl]| ds.iter().map(|d| format!("{} {}", d.ty, d.name)).collect::<Vec<_>>().join(", ");
        write!(f, "{} {MAIN}({})", self.return_type, list(&self.params))?;
        if !self.locals.is_empty() {
            write!(f, " vars: {}", list(&self.locals))?;
        }
        Ok(())
    }
}

const DEFAULT_INTS: [i64; 5] = [-1, 0, 1, 2, 10];

/// Decoding grammar for one skeleton. Legal productions per nonterminal are
/// computed once and cached.
#[derive(Debug)]
pub struct Grammar {
    pub skeleton: Skeleton,
    pub records: Vec<RecordDecl>,
    pub body: BodyShape,
    /// Expression alternatives that may be produced.
    pub expr_kinds: BTreeSet<ProductionKind>,
    /// Callable functions and operators; `None` allows every builtin.
    pub callables: Option<Vec<String>>,
    /// Constant vocabulary.
    pub constants: Vec<Literal>,
    /// Types that may annotate expression holes not forced by context, such
    /// as operator arguments and expression statements.
    pub types: Vec<TypeTag>,
    cache: Mutex<HashMap<Nonterminal, std::sync::Arc<[Production]>>>,
}

impl Clone for Grammar {
    fn clone(&self) -> Self {
        Grammar {
            skeleton: self.skeleton.clone(),
            records: self.records.clone(),
            body: self.body,
            expr_kinds: self.expr_kinds.clone(),
            callables: self.callables.clone(),
            constants: self.constants.clone(),
            types: self.types.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

fn literal_type(l: &Literal) -> TypeTag {
    match l {
        Literal::Bool(_) => TypeTag::Bool,
        Literal::Int(_) => TypeTag::Int,
        Literal::Real(_) => TypeTag::Real,
        Literal::Char(_) => TypeTag::Char,
        Literal::Str(_) => TypeTag::string(),
    }
}

fn add_type(types: &mut Vec<TypeTag>, t: &TypeTag) {
    if *t == TypeTag::Void || types.contains(t) {
        return;
    }
    types.push(t.clone());
    match t {
        TypeTag::Array(e) | TypeTag::Set(e) => add_type(types, e),
        TypeTag::Map(k, v) => {
            add_type(types, k);
            add_type(types, v);
        }
        _ => {}
    }
}

impl Grammar {
    /// Full grammar over the skeleton's types plus `bool` and `int`, all
    /// builtins, and the default constants.
    pub fn new(skeleton: Skeleton) -> Grammar {
        let mut types = vec![TypeTag::Bool, TypeTag::Int];
        add_type(&mut types, &skeleton.return_type);
        for d in skeleton.decls() {
            add_type(&mut types, &d.ty);
        }
        let mut constants: Vec<Literal> = vec![Literal::Bool(false), Literal::Bool(true)];
        constants.extend(DEFAULT_INTS.iter().map(|&i| Literal::Int(i)));
        use ProductionKind as K;
        Grammar {
            skeleton,
            records: Vec::new(),
            body: BodyShape::Statements,
            expr_kinds: [K::Assign, K::Var, K::Field, K::Constant, K::Invoke, K::Ternary, K::Cast].into(),
            callables: None,
            constants,
            types,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_body(mut self, body: BodyShape) -> Self {
        self.body = body;
        self.invalidate();
        self
    }

    pub fn with_expr_kinds(mut self, kinds: impl IntoIterator<Item = ProductionKind>) -> Self {
        self.expr_kinds = kinds.into_iter().collect();
        self.invalidate();
        self
    }

    pub fn with_callables(mut self, names: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.callables = Some(names.into_iter().map(Into::into).collect());
        self.invalidate();
        self
    }

    pub fn with_constants(mut self, constants: Vec<Literal>) -> Self {
        self.constants = constants;
        self.invalidate();
        self
    }

    pub fn with_types(mut self, types: Vec<TypeTag>) -> Self {
        self.types = types;
        self.invalidate();
        self
    }

    pub fn with_records(mut self, records: Vec<RecordDecl>) -> Self {
        for r in &records {
            add_type(&mut self.types, &TypeTag::record(r.name.clone()));
        }
        self.records = records;
        self.invalidate();
        self
    }

    /// Adds every constant appearing in `corpus` whose type is in the
    /// universe.
    pub fn with_corpus_constants(mut self, corpus: &[Program]) -> Self {
        for p in corpus {
            traverse(p, &mut |n: NodeRef<'_>| {
                if let NodeRef::Expr(Expr::Const { value, .. }) = n {
                    if self.types.contains(&literal_type(value)) && !self.constants.contains(value) {
                        self.constants.push(value.clone());
                    }
                }
            });
        }
        self.invalidate();
        self
    }

    fn invalidate(&mut self) {
        self.cache.get_mut().unwrap_or_else(|e| e.into_inner()).clear();
    }

    /// Nonterminal of the initial hole.
    pub fn root(&self) -> Nonterminal {
        match self.body {
            BodyShape::Statements => Nonterminal::Block { in_loop: false },
            BodyShape::SingleReturn => Nonterminal::Expr(self.skeleton.return_type.clone()),
        }
    }

    /// Production implicitly above the root hole, if any.
    pub fn root_parent(&self) -> Option<Production> {
        match self.body {
            BodyShape::Statements => None,
            BodyShape::SingleReturn => Some(Production::Return(self.skeleton.return_type.clone())),
        }
    }

    fn callable(&self, name: &str) -> bool {
        match &self.callables {
            None => true,
            Some(names) => names.iter().any(|n| n == name),
        }
    }

    fn allows(&self, k: ProductionKind) -> bool {
        self.expr_kinds.contains(&k)
    }

    fn vars_of(&self, ty: &TypeTag) -> Vec<Production> {
        self.skeleton
            .decls()
            .filter(|d| d.ty == *ty)
            .map(|d| Production::Var { ty: d.ty.clone(), name: d.name.clone() })
            .collect()
    }

    fn fields_of(&self, ty: &TypeTag) -> Vec<Production> {
        let mut out = Vec::new();
        for r in &self.records {
            if !self.types.contains(&TypeTag::record(r.name.clone())) {
                continue;
            }
            for (name, d) in &r.fields {
                if d.ty == *ty {
                    out.push(Production::Field { record: r.name.clone(), field: name.clone(), ty: ty.clone() });
                }
            }
        }
        out
    }

    fn invokes_of(&self, ty: &TypeTag, place: bool) -> Vec<Production> {
        let mut out = Vec::new();
        let mut names: Vec<&str> = typing::BINARY_OPERATORS.to_vec();
        names.extend(typing::UNARY_OPERATORS.iter().filter(|n| !typing::is_binary_operator(n)));
        names.extend(typing::BUILTINS.iter().map(|(n, _)| *n));
        for name in names {
            if !self.callable(name) || (place && !typing::is_place_builtin(name)) {
                continue;
            }
            if name == "new" {
                if ty.is_container() {
                    out.push(Production::Invoke { func: name.into(), ret: ty.clone(), args: vec![] });
                }
                continue;
            }
            for arity in typing::builtin_arities(name) {
                for args in tuples(&self.types, arity) {
                    let inv = Production::Invoke { func: name.into(), ret: ty.clone(), args };
                    if let Production::Invoke { args, .. } = &inv {
                        if typing::result_type(name, args).as_ref() == Some(ty) && !out.contains(&inv) {
                            out.push(inv);
                        }
                    }
                }
            }
        }
        out
    }

    fn compute(&self, nt: &Nonterminal) -> Vec<Production> {
        use ProductionKind as K;
        let mut out = Vec::new();
        match nt {
            Nonterminal::Block { .. } => {
                out.push(Production::Cons);
                out.push(Production::End);
            }
            Nonterminal::Stmt { in_loop } => {
                for t in &self.types {
                    out.push(Production::ExprStmt(t.clone()));
                }
                out.push(Production::If);
                for d in self.skeleton.decls() {
                    for t in &self.types {
                        let elem = match t {
                            TypeTag::Array(e) | TypeTag::Set(e) | TypeTag::Map(e, _) => e,
                            _ => continue,
                        };
                        if **elem == d.ty {
                            out.push(Production::Foreach { var: d.name.clone(), iterable: t.clone() });
                        }
                    }
                }
                out.push(Production::While);
                if *in_loop {
                    out.push(Production::Break);
                    out.push(Production::Continue);
                }
                out.push(Production::Return(self.skeleton.return_type.clone()));
                out.push(Production::Noop);
            }
            Nonterminal::Expr(ty) => {
                if self.allows(K::Assign) {
                    out.push(Production::Assign(ty.clone()));
                }
                if self.allows(K::Var) {
                    out.extend(self.vars_of(ty));
                }
                if self.allows(K::Field) {
                    out.extend(self.fields_of(ty));
                }
                if self.allows(K::Constant) {
                    for c in &self.constants {
                        if literal_type(c) == *ty {
                            out.push(Production::Const { ty: ty.clone(), value: c.clone() });
                        }
                    }
                }
                if self.allows(K::Invoke) {
                    out.extend(self.invokes_of(ty, false));
                }
                if self.allows(K::Ternary) {
                    out.push(Production::Ternary(ty.clone()));
                }
                if self.allows(K::Cast) {
                    for from in &self.types {
                        if from != ty && typing::cast_allowed(from, ty) {
                            out.push(Production::Cast { from: from.clone(), to: ty.clone() });
                        }
                    }
                }
            }
            Nonterminal::Place(ty) => {
                out.extend(self.vars_of(ty));
                out.extend(self.fields_of(ty));
                out.extend(self.invokes_of(ty, true));
            }
        }
        out
    }

    /// Productions admissible at a hole of `nt`, in declaration order.
    pub fn productions(&self, nt: &Nonterminal) -> std::sync::Arc<[Production]> {
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        cache.entry(nt.clone()).or_insert_with(|| self.compute(nt).into()).clone()
    }
}

fn tuples(types: &[TypeTag], arity: usize) -> Vec<Vec<TypeTag>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                types.iter().map(move |t| {
                    let mut next = prefix.clone();
                    next.push(t.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// One step of a leftmost derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationStep {
    pub nonterminal: Nonterminal,
    /// Production of the parent node and this node's index under it.
    pub parent: Option<(Production, usize)>,
    pub production: Production,
}

/// Leftmost derivation of every function body in `p`, in the order the
/// decoder would produce it.
pub fn derivations(p: &Program) -> Vec<Vec<DerivationStep>> {
    p.funcs
        .iter()
        .map(|f| {
            let mut d = Deriver { ret: f.return_type.clone(), out: Vec::new() };
            d.block(&f.body, false, None);
            d.out
        })
        .collect()
}

struct Deriver {
    ret: TypeTag,
    out: Vec<DerivationStep>,
}

impl Deriver {
    fn push(&mut self, nt: Nonterminal, parent: Option<(Production, usize)>, prod: Production) -> Production {
        self.out.push(DerivationStep { nonterminal: nt, parent, production: prod.clone() });
        prod
    }

    fn block(&mut self, stmts: &[Stmt], in_loop: bool, parent: Option<(Production, usize)>) {
        let nt = Nonterminal::Block { in_loop };
        match stmts.split_first() {
            None => {
                self.push(nt, parent, Production::End);
            }
            Some((first, rest)) => {
                let cons = self.push(nt, parent, Production::Cons);
                self.stmt(first, in_loop, Some((cons.clone(), 0)));
                self.block(rest, in_loop, Some((cons, 1)));
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, in_loop: bool, parent: Option<(Production, usize)>) {
        let nt = Nonterminal::Stmt { in_loop };
        match s {
            Stmt::Expr(e) => {
                let p = self.push(nt, parent, Production::ExprStmt(e.ty().clone()));
                self.expr(e, Some((p, 0)));
            }
            Stmt::If { cond, then_body, else_body, .. } => {
                let p = self.push(nt, parent, Production::If);
                self.expr(cond, Some((p.clone(), 0)));
                self.block(then_body, in_loop, Some((p.clone(), 1)));
                self.block(else_body, in_loop, Some((p, 2)));
            }
            Stmt::Foreach { var, iterable, body, .. } => {
                let prod = Production::Foreach { var: var.name.clone(), iterable: iterable.ty().clone() };
                let p = self.push(nt, parent, prod);
                self.expr(iterable, Some((p.clone(), 0)));
                self.block(body, true, Some((p, 1)));
            }
            Stmt::While { cond, body, increment, .. } => {
                let p = self.push(nt, parent, Production::While);
                self.expr(cond, Some((p.clone(), 0)));
                self.block(body, true, Some((p.clone(), 1)));
                self.block(increment, false, Some((p, 2)));
            }
            Stmt::Break(_) => {
                self.push(nt, parent, Production::Break);
            }
            Stmt::Continue(_) => {
                self.push(nt, parent, Production::Continue);
            }
            Stmt::Return { expr, .. } => {
                let p = self.push(nt, parent, Production::Return(self.ret.clone()));
                self.expr(expr, Some((p, 0)));
            }
            Stmt::Noop => {
                self.push(nt, parent, Production::Noop);
            }
        }
    }

    fn node(&mut self, e: &Expr, nt: Nonterminal, parent: Option<(Production, usize)>) {
        let prod = match e {
            Expr::Assign { ty, .. } => Production::Assign(ty.clone()),
            Expr::Var { ty, name } => Production::Var { ty: ty.clone(), name: name.clone() },
            Expr::Field { ty, object, field } => Production::Field {
                record: match object.ty() {
                    TypeTag::Record(r) => r.clone(),
                    other => other.to_string(),
                },
                field: field.clone(),
                ty: ty.clone(),
            },
            Expr::Const { ty, value } => Production::Const { ty: ty.clone(), value: value.clone() },
            Expr::Invoke { ty, func, args } => Production::Invoke {
                func: func.clone(),
                ret: ty.clone(),
                args: args.iter().map(|a| a.ty().clone()).collect(),
            },
            Expr::Ternary { ty, .. } => Production::Ternary(ty.clone()),
            Expr::Cast { ty, expr } => Production::Cast { from: expr.ty().clone(), to: ty.clone() },
        };
        let p = self.push(nt, parent, prod);
        let sub = |i: usize| Some((p.clone(), i));
        match e {
            Expr::Assign { lhs, rhs, .. } => {
                self.node(lhs, Nonterminal::Place(lhs.ty().clone()), sub(0));
                self.expr(rhs, sub(1));
            }
            Expr::Var { .. } | Expr::Const { .. } => {}
            Expr::Field { object, .. } => self.expr(object, sub(0)),
            Expr::Invoke { args, .. } => {
                for (i, a) in args.iter().enumerate() {
                    self.expr(a, sub(i));
                }
            }
            Expr::Ternary { cond, then, els, .. } => {
                self.expr(cond, sub(0));
                self.expr(then, sub(1));
                self.expr(els, sub(2));
            }
            Expr::Cast { expr, .. } => self.expr(expr, sub(0)),
        }
    }

    fn expr(&mut self, e: &Expr, parent: Option<(Production, usize)>) {
        self.node(e, Nonterminal::Expr(e.ty().clone()), parent);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_skeleton() -> Skeleton {
        Skeleton::parse("int __main__(int var0) vars: int var1, int var2, int var3").unwrap()
    }

    #[test]
    fn skeleton_text_round_trips() {
        let s = sample_skeleton();
        assert_eq!(s.params, vec![VarDecl::new(TypeTag::Int, "var0")]);
        assert_eq!(s.locals.len(), 3);
        assert_eq!(Skeleton::parse(&s.to_string()).unwrap(), s);
        assert!(Skeleton::parse("int main(int a)").is_err());
        assert!(Skeleton::parse("int __main__").is_err());
        let m = Skeleton::parse("<int|char*> __main__(int* a, char b)").unwrap();
        assert_eq!(m.return_type, TypeTag::map(TypeTag::Int, TypeTag::string()));
    }

    #[test]
    fn loop_control_only_inside_loops() {
        let g = Grammar::new(sample_skeleton());
        let top = g.productions(&Nonterminal::Stmt { in_loop: false });
        assert!(!top.iter().any(|p| matches!(p, Production::Break | Production::Continue)));
        let inner = g.productions(&Nonterminal::Stmt { in_loop: true });
        assert!(inner.contains(&Production::Break) && inner.contains(&Production::Continue));
    }

    #[test]
    fn var_productions_only_name_declared_variables() {
        let s = Skeleton::parse("int __main__(int var0) vars: int var1").unwrap();
        let g = Grammar::new(s);
        let names: Vec<String> = g
            .productions(&Nonterminal::Expr(TypeTag::Int))
            .iter()
            .filter_map(|p| match p {
                Production::Var { name, .. } => Some(name.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(names, ["var0", "var1"]);
    }

    #[test]
    fn invoke_signatures_are_type_consistent() {
        let g = Grammar::new(sample_skeleton());
        for p in g.productions(&Nonterminal::Expr(TypeTag::Bool)).iter() {
            if let Production::Invoke { func, ret, args } = p {
                assert_eq!(typing::result_type(func, args).as_ref(), Some(ret));
            }
        }
    }

    #[test]
    fn derivation_follows_preorder() {
        let p = codec::parse_program(
            r#"{"types":[],"funcs":[["func","int","__main__",[["var","int","a"]],[],[
                ["return","int",["invoke","int","+",[["var","int","a"],["val","int",1]]]]]]]}"#,
        )
        .unwrap();
        let d = &derivations(&p)[0];
        let kinds: Vec<ProductionKind> = d.iter().map(|s| s.production.kind()).collect();
        use ProductionKind as K;
        assert_eq!(kinds, [K::Cons, K::Return, K::Invoke, K::Var, K::Constant, K::End]);
        assert_eq!(d[3].parent.as_ref().map(|(_, i)| *i), Some(0));
        assert_eq!(d[5].nonterminal, Nonterminal::Block { in_loop: false });
    }
}
