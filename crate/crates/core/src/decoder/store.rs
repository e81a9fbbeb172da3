//! Persistent arena of partial program trees.
//!
//! Nodes are immutable once pushed. Filling a hole copies only the path from
//! the hole to the root; everything else is shared between the old and the
//! new tree, so every tree ever created stays addressable and unchanged.

use std::sync::Arc;

use super::grammar::{Nonterminal, Production};
use super::DecodeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProdId(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NtId(u32);

#[derive(Clone, Debug)]
enum Payload {
    Hole,
    Filled { prod: ProdId, children: Box<[NodeId]> },
}

#[derive(Clone, Debug)]
struct Node {
    nt: NtId,
    payload: Payload,
}

/// Read-only view of one arena node.
#[derive(Clone, Copy, Debug)]
pub enum NodeView<'s> {
    Hole(&'s Nonterminal),
    Filled { prod: &'s Production, children: &'s [NodeId] },
}

/// Hole address: child indices from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hole {
    pub path: Vec<u16>,
    pub nt: NtId,
}

#[derive(Debug)]
struct HistoryCell {
    prod: ProdId,
    prev: History,
}

/// Productions applied so far, newest first. Shared between a tree and its
/// forks.
#[derive(Clone, Debug, Default)]
pub struct History(Option<Arc<HistoryCell>>);

impl History {
    pub fn push(&self, prod: ProdId) -> History {
        History(Some(Arc::new(HistoryCell { prod, prev: self.clone() })))
    }

    /// Most recent productions first.
    pub fn iter(&self) -> impl Iterator<Item = ProdId> + '_ {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let cell = cur?;
            cur = cell.prev.0.as_deref();
            Some(cell.prod)
        })
    }
}

/// One version of a partial program.
#[derive(Clone, Debug)]
pub struct PartialTree {
    pub root: NodeId,
    /// Unfilled holes in leftmost (preorder) order.
    pub holes: Vec<Hole>,
    /// Sum of the log-probabilities of the applied productions.
    pub score: f64,
    /// Number of filled nodes.
    pub filled: usize,
    pub history: History,
}

impl PartialTree {
    pub fn is_complete(&self) -> bool {
        self.holes.is_empty()
    }
}

#[derive(Debug)]
struct Interner<T> {
    items: Vec<T>,
    ids: std::collections::HashMap<T, u32>,
}

impl<T> Default for Interner<T> {
    fn default() -> Self {
        Interner { items: Vec::new(), ids: std::collections::HashMap::new() }
    }
}

impl<T: Clone + Eq + std::hash::Hash> Interner<T> {
    fn intern(&mut self, v: &T) -> u32 {
        if let Some(&id) = self.ids.get(v) {
            return id;
        }
        let id = self.items.len() as u32;
        self.items.push(v.clone());
        self.ids.insert(v.clone(), id);
        id
    }
}

#[derive(Debug, Default)]
pub struct TreeStore {
    nodes: Vec<Node>,
    prods: Interner<Production>,
    nts: Interner<Nonterminal>,
}

impl TreeStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of arena nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intern_production(&mut self, p: &Production) -> ProdId {
        ProdId(self.prods.intern(p))
    }

    pub fn intern_nonterminal(&mut self, nt: &Nonterminal) -> NtId {
        NtId(self.nts.intern(nt))
    }

    pub fn production(&self, id: ProdId) -> &Production {
        &self.prods.items[id.0 as usize]
    }

    pub fn nonterminal(&self, id: NtId) -> &Nonterminal {
        &self.nts.items[id.0 as usize]
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    pub fn view(&self, id: NodeId) -> NodeView<'_> {
        let node = &self.nodes[id.0 as usize];
        match &node.payload {
            Payload::Hole => NodeView::Hole(self.nonterminal(node.nt)),
            Payload::Filled { prod, children } => NodeView::Filled { prod: self.production(*prod), children },
        }
    }

    pub fn node_nonterminal(&self, id: NodeId) -> &Nonterminal {
        self.nonterminal(self.nodes[id.0 as usize].nt)
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.nodes[id.0 as usize].payload {
            Payload::Hole => &[],
            Payload::Filled { children, .. } => children,
        }
    }

    /// A tree consisting of a single hole.
    pub fn empty_tree(&mut self, root: &Nonterminal) -> PartialTree {
        let nt = self.intern_nonterminal(root);
        let id = self.push(Node { nt, payload: Payload::Hole });
        PartialTree {
            root: id,
            holes: vec![Hole { path: vec![], nt }],
            score: 0.0,
            filled: 0,
            history: History::default(),
        }
    }

    /// Node ids from the root down to the node at `path`.
    pub fn path_nodes(&self, root: NodeId, path: &[u16]) -> Option<Vec<NodeId>> {
        let mut out = Vec::with_capacity(path.len() + 1);
        let mut cur = root;
        out.push(cur);
        for &i in path {
            cur = *self.children(cur).get(i as usize)?;
            out.push(cur);
        }
        Some(out)
    }

    /// Forks `t` by filling `t.holes[hole]` with `prod`, whose child holes
    /// are `child_nts`. Legality is the caller's concern.
    pub fn fork(
        &mut self,
        t: &PartialTree,
        hole: usize,
        prod: &Production,
        child_nts: &[Nonterminal],
        log_prob: f64,
    ) -> Result<PartialTree, DecodeError> {
        let h = t.holes.get(hole).ok_or(DecodeError::UnknownHole(hole))?;
        let path = self.path_nodes(t.root, &h.path).ok_or(DecodeError::UnknownHole(hole))?;
        if !matches!(self.nodes[path[path.len() - 1].0 as usize].payload, Payload::Hole) {
            return Err(DecodeError::UnknownHole(hole));
        }
        let prod_id = self.intern_production(prod);
        let mut new_holes = Vec::with_capacity(t.holes.len() + child_nts.len());
        new_holes.extend_from_slice(&t.holes[..hole]);
        let mut kids = Vec::with_capacity(child_nts.len());
        for (i, nt) in child_nts.iter().enumerate() {
            let nt = self.intern_nonterminal(nt);
            kids.push(self.push(Node { nt, payload: Payload::Hole }));
            let mut p = h.path.clone();
            p.push(i as u16);
            new_holes.push(Hole { path: p, nt });
        }
        new_holes.extend_from_slice(&t.holes[hole + 1..]);
        let mut cur = self.push(Node { nt: h.nt, payload: Payload::Filled { prod: prod_id, children: kids.into() } });
        for depth in (0..h.path.len()).rev() {
            let ancestor = &self.nodes[path[depth].0 as usize];
            let (nt, mut payload) = (ancestor.nt, ancestor.payload.clone());
            if let Payload::Filled { children, .. } = &mut payload {
                children[h.path[depth] as usize] = cur;
            }
            cur = self.push(Node { nt, payload });
        }
        Ok(PartialTree {
            root: cur,
            holes: new_holes,
            score: t.score + log_prob,
            filled: t.filled + 1,
            history: t.history.push(prod_id),
        })
    }

    /// S-expression rendering of a tree, holes shown as `?NT`.
    pub fn render(&self, root: NodeId) -> String {
        let mut out = String::new();
        self.render_into(root, &mut out);
        out
    }

    fn render_into(&self, id: NodeId, out: &mut String) {
        match self.view(id) {
            NodeView::Hole(nt) => {
                out.push('?');
                out.push_str(&nt.to_string());
            }
            NodeView::Filled { prod, children } => {
                if children.is_empty() {
                    out.push_str(&format!("[{prod}]"));
                    return;
                }
                out.push_str(&format!("[{prod}"));
                for &c in children {
                    out.push(' ');
                    self.render_into(c, out);
                }
                out.push(']');
            }
        }
    }
}

/// What a scorer sees at a hole: the tree's derivation history, the parent
/// production and the hole's siblings.
#[derive(Clone, Debug)]
pub struct HoleContext<'s> {
    pub store: &'s TreeStore,
    pub nonterminal: &'s Nonterminal,
    /// Productions applied to the tree so far, newest first.
    pub history: &'s History,
    /// Parent production and the hole's index under it.
    pub parent: Option<(&'s Production, usize)>,
    pub left_siblings: Vec<NodeView<'s>>,
    pub right_siblings: Vec<NodeView<'s>>,
}

impl<'s> HoleContext<'s> {
    pub fn new(
        store: &'s TreeStore,
        tree: &'s PartialTree,
        hole: usize,
        root_parent: Option<&'s Production>,
    ) -> Result<Self, DecodeError> {
        let h = tree.holes.get(hole).ok_or(DecodeError::UnknownHole(hole))?;
        let path = store.path_nodes(tree.root, &h.path).ok_or(DecodeError::UnknownHole(hole))?;
        let (parent, left, right) = match (h.path.last(), path.len().checked_sub(2)) {
            (Some(&idx), Some(pi)) => {
                let parent_id = path[pi];
                let prod = match store.view(parent_id) {
                    NodeView::Filled { prod, .. } => prod,
                    NodeView::Hole(_) => return Err(DecodeError::UnknownHole(hole)),
                };
                let sibs = store.children(parent_id);
                let idx = idx as usize;
                (
                    Some((prod, idx)),
                    sibs[..idx].iter().map(|&s| store.view(s)).collect(),
                    sibs[idx + 1..].iter().map(|&s| store.view(s)).collect(),
                )
            }
            _ => (root_parent.map(|p| (p, 0)), vec![], vec![]),
        };
        Ok(HoleContext {
            store,
            nonterminal: store.nonterminal(h.nt),
            history: &tree.history,
            parent,
            left_siblings: left,
            right_siblings: right,
        })
    }

    /// Up to `k` most recent productions, newest first.
    pub fn recent(&self, k: usize) -> Vec<&'s Production> {
        self.history.iter().take(k).map(|id| self.store.production(id)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::TypeTag;

    #[test]
    fn fork_leaves_the_original_intact() {
        let mut s = TreeStore::new();
        let int = Nonterminal::Expr(TypeTag::Int);
        let t0 = s.empty_tree(&int);
        let plus = Production::Invoke { func: "+".into(), ret: TypeTag::Int, args: vec![TypeTag::Int; 2] };
        let t1 = s.fork(&t0, 0, &plus, &[int.clone(), int.clone()], -1.0).unwrap();
        let one = Production::Const { ty: TypeTag::Int, value: crate::ast::Literal::Int(1) };
        let t2 = s.fork(&t1, 1, &one, &[], -0.5).unwrap();
        assert_eq!(s.render(t0.root), "?EXPR:int");
        assert_eq!(s.render(t1.root), "[invoke int +(int,int) ?EXPR:int ?EXPR:int]");
        assert_eq!(s.render(t2.root), "[invoke int +(int,int) ?EXPR:int [val int 1]]");
        assert_eq!(t2.holes.len(), 1);
        assert_eq!(t2.score, -1.5);
        // left operand hole is shared
        assert_eq!(s.children(t1.root)[0], s.children(t2.root)[0]);
        assert!(s.fork(&t2, 3, &one, &[], 0.0).is_err());
    }

    #[test]
    fn context_sees_parent_and_siblings() {
        let mut s = TreeStore::new();
        let int = Nonterminal::Expr(TypeTag::Int);
        let t0 = s.empty_tree(&int);
        let plus = Production::Invoke { func: "+".into(), ret: TypeTag::Int, args: vec![TypeTag::Int; 2] };
        let t1 = s.fork(&t0, 0, &plus, &[int.clone(), int.clone()], 0.0).unwrap();
        let ctx = HoleContext::new(&s, &t1, 1, None).unwrap();
        assert_eq!(ctx.parent.map(|(p, i)| (p.clone(), i)), Some((plus.clone(), 1)));
        assert_eq!(ctx.left_siblings.len(), 1);
        assert!(ctx.right_siblings.is_empty());
        assert_eq!(ctx.recent(3), vec![&plus]);
    }
}
