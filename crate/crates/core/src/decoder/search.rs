//! Best-first decoding over partial trees.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ast::*;

use super::grammar::{BodyShape, Grammar, Nonterminal, Production};
use super::scorer::Scorer;
use super::store::{HoleContext, NodeId, NodeView, PartialTree, TreeStore};
use super::DecodeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub queue_capacity: usize,
    pub expansions_per_step: usize,
    /// Trees whose filled nodes plus open holes exceed this are dropped.
    pub max_tree_nodes: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { queue_capacity: 64, expansions_per_step: 64, max_tree_nodes: 256 }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<(), DecodeError> {
        if self.queue_capacity == 0 || self.expansions_per_step == 0 || self.max_tree_nodes == 0 {
            return Err(DecodeError::Config("queue_capacity, expansions_per_step and max_tree_nodes must be positive"));
        }
        Ok(())
    }
}

/// A complete decoded program.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub program: Program,
    pub score: f64,
    pub nodes: usize,
}

/// Productions legal at `t.holes[hole]`.
pub fn legal_extensions(
    grammar: &Grammar,
    store: &TreeStore,
    t: &PartialTree,
    hole: usize,
) -> Result<Arc<[Production]>, DecodeError> {
    let h = t.holes.get(hole).ok_or(DecodeError::UnknownHole(hole))?;
    Ok(grammar.productions(store.nonterminal(h.nt)))
}

/// Fills `t.holes[hole]` with `prod`, checking legality.
pub fn extend(
    grammar: &Grammar,
    store: &mut TreeStore,
    t: &PartialTree,
    hole: usize,
    prod: &Production,
    log_prob: f64,
) -> Result<PartialTree, DecodeError> {
    let legal = legal_extensions(grammar, store, t, hole)?;
    if !legal.contains(prod) {
        return Err(DecodeError::IllegalProduction(prod.to_string()));
    }
    let nt = store.nonterminal(t.holes[hole].nt).clone();
    store.fork(t, hole, prod, &prod.children(&nt), log_prob)
}

struct Candidate {
    parent: usize,
    prod: Production,
    rank: usize,
    score: f64,
    seq: usize,
}

fn by_priority(a: &(f64, usize, usize), b: &(f64, usize, usize)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Decodes complete programs for `grammar`'s skeleton, best first.
///
/// Each round expands the leftmost hole of every queued tree with its
/// `expansions_per_step` best productions; the forks are ranked by
/// cumulative score (ties: production order, then creation order) and only
/// the best `queue_capacity` are materialized. Complete survivors leave the
/// queue for the result set; the rest form the next queue.
pub fn decode(scorer: &dyn Scorer, cfg: &SearchConfig, grammar: &Grammar) -> Result<Vec<Decoded>, DecodeError> {
    let mut store = TreeStore::new();
    decode_in(&mut store, scorer, cfg, grammar)
}

pub fn decode_in(
    store: &mut TreeStore,
    scorer: &dyn Scorer,
    cfg: &SearchConfig,
    grammar: &Grammar,
) -> Result<Vec<Decoded>, DecodeError> {
    cfg.validate()?;
    let root_parent = grammar.root_parent();
    let mut queue = vec![store.empty_tree(&grammar.root())];
    let mut done: Vec<(f64, usize, usize, PartialTree)> = Vec::new();
    let mut index: HashMap<Nonterminal, HashMap<Production, usize>> = HashMap::new();
    let mut seq = 0usize;
    while !queue.is_empty() {
        let mut cands: Vec<Candidate> = Vec::new();
        for (ti, t) in queue.iter().enumerate() {
            let legal = legal_extensions(grammar, store, t, 0)?;
            let nt = store.nonterminal(t.holes[0].nt);
            let positions = index
                .entry(nt.clone())
                .or_insert_with(|| legal.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect());
            let ctx = HoleContext::new(store, t, 0, root_parent.as_ref())?;
            let mut scored = Vec::new();
            for (prod, lp) in scorer.score_extensions(&ctx, &legal) {
                let rank = *positions.get(&prod).ok_or_else(|| DecodeError::IllegalProduction(prod.to_string()))?;
                if lp.is_nan() || lp > 0.0 {
                    return Err(DecodeError::BadScore(prod.to_string()));
                }
                scored.push((lp, rank, prod));
            }
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            scored.truncate(cfg.expansions_per_step);
            for (lp, rank, prod) in scored {
                let nodes = t.filled + t.holes.len() + prod.arity();
                if nodes > cfg.max_tree_nodes {
                    continue;
                }
                cands.push(Candidate { parent: ti, prod, rank, score: t.score + lp, seq });
                seq += 1;
            }
        }
        cands.sort_by(|a, b| by_priority(&(a.score, a.rank, a.seq), &(b.score, b.rank, b.seq)));
        let mut next = Vec::new();
        cands.truncate(cfg.queue_capacity);
        for c in cands {
            let parent = &queue[c.parent];
            let nt = store.nonterminal(parent.holes[0].nt).clone();
            let t = store.fork(parent, 0, &c.prod, &c.prod.children(&nt), c.score - parent.score)?;
            if t.is_complete() {
                done.push((c.score, c.rank, c.seq, t));
            } else {
                next.push(t);
            }
        }
        queue = next;
    }
    done.sort_by(|a, b| by_priority(&(a.0, a.1, a.2), &(b.0, b.1, b.2)));
    done.into_iter()
        .map(|(score, _, _, t)| Ok(Decoded { program: project(grammar, store, &t)?, score, nodes: t.filled }))
        .collect()
}

/// Converts a complete tree into a program.
pub fn project(grammar: &Grammar, store: &TreeStore, t: &PartialTree) -> Result<Program, DecodeError> {
    if !t.is_complete() {
        return Err(DecodeError::Incomplete);
    }
    let sk = &grammar.skeleton;
    let body = match grammar.body {
        BodyShape::Statements => block(store, t.root)?,
        BodyShape::SingleReturn => {
            vec![Stmt::Return { ty: sk.return_type.clone(), expr: expr(store, t.root)? }]
        }
    };
    Ok(Program {
        records: grammar.records.clone(),
        funcs: vec![FuncDecl {
            kind: FuncKind::Func,
            return_type: sk.return_type.clone(),
            name: MAIN.to_string(),
            params: sk.params.clone(),
            locals: sk.locals.clone(),
            body,
        }],
    })
}

fn filled(store: &TreeStore, id: NodeId) -> Result<(&Production, &[NodeId]), DecodeError> {
    match store.view(id) {
        NodeView::Filled { prod, children } => Ok((prod, children)),
        NodeView::Hole(_) => Err(DecodeError::Incomplete),
    }
}

fn block(store: &TreeStore, mut id: NodeId) -> Result<Vec<Stmt>, DecodeError> {
    let mut out = Vec::new();
    loop {
        match filled(store, id)? {
            (Production::End, _) => return Ok(out),
            (Production::Cons, [s, rest]) => {
                out.push(stmt(store, *s)?);
                id = *rest;
            }
            (p, _) => return Err(DecodeError::Malformed(format!("{p} where a block was expected"))),
        }
    }
}

fn stmt(store: &TreeStore, id: NodeId) -> Result<Stmt, DecodeError> {
    let (prod, kids) = filled(store, id)?;
    Ok(match (prod, kids) {
        (Production::ExprStmt(_), [e]) => Stmt::Expr(expr(store, *e)?),
        (Production::If, [c, t, e]) => Stmt::If {
            ty: TypeTag::Void,
            cond: expr(store, *c)?,
            then_body: block(store, *t)?,
            else_body: block(store, *e)?,
        },
        (Production::Foreach { var, iterable }, [it, body]) => {
            let elem = iterable.iter_elem().cloned().unwrap_or(TypeTag::Void);
            Stmt::Foreach {
                ty: TypeTag::Void,
                var: VarDecl::new(elem, var.clone()),
                iterable: expr(store, *it)?,
                body: block(store, *body)?,
            }
        }
        (Production::While, [c, body, incr]) => Stmt::While {
            ty: TypeTag::Void,
            cond: expr(store, *c)?,
            body: block(store, *body)?,
            increment: block(store, *incr)?,
        },
        (Production::Break, []) => Stmt::Break(TypeTag::Void),
        (Production::Continue, []) => Stmt::Continue(TypeTag::Void),
        (Production::Return(t), [e]) => Stmt::Return { ty: t.clone(), expr: expr(store, *e)? },
        (Production::Noop, []) => Stmt::Noop,
        (p, _) => return Err(DecodeError::Malformed(format!("{p} where a statement was expected"))),
    })
}

fn expr(store: &TreeStore, id: NodeId) -> Result<Expr, DecodeError> {
    let (prod, kids) = filled(store, id)?;
    let sub = |i: usize| expr(store, kids[i]).map(Box::new);
    Ok(match prod {
        Production::Assign(t) => Expr::Assign { ty: t.clone(), lhs: sub(0)?, rhs: sub(1)? },
        Production::Var { ty, name } => Expr::Var { ty: ty.clone(), name: name.clone() },
        Production::Field { field, ty, .. } => Expr::Field { ty: ty.clone(), object: sub(0)?, field: field.clone() },
        Production::Const { ty, value } => Expr::Const { ty: ty.clone(), value: value.clone() },
        Production::Invoke { func, ret, .. } => Expr::Invoke {
            ty: ret.clone(),
            func: func.clone(),
            args: kids.iter().map(|&k| expr(store, k)).collect::<Result<_, _>>()?,
        },
        Production::Ternary(t) => Expr::Ternary { ty: t.clone(), cond: sub(0)?, then: sub(1)?, els: sub(2)? },
        Production::Cast { to, .. } => Expr::Cast { ty: to.clone(), expr: sub(0)? },
        p => return Err(DecodeError::Malformed(format!("{p} where an expression was expected"))),
    })
}
