//! Scorers rank the legal productions at a hole.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::ast::Program;

use super::grammar::{derivations, Nonterminal, Production};
use super::store::HoleContext;

pub trait Scorer {
    /// Log-probabilities for (a subset of) `legal`. Every returned
    /// production must come from `legal` and every score must be `<= 0`.
    fn score_extensions(&self, ctx: &HoleContext<'_>, legal: &[Production]) -> Vec<(Production, f64)>;
}

/// Every legal production is equally likely.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    fn score_extensions(&self, _ctx: &HoleContext<'_>, legal: &[Production]) -> Vec<(Production, f64)> {
        let lp = -(legal.len() as f64).ln();
        legal.iter().map(|p| (p.clone(), lp)).collect()
    }
}

#[derive(Debug, Default)]
struct Counts {
    total: u64,
    by_prod: HashMap<Production, u64>,
}

impl Counts {
    fn add(&mut self, p: &Production) {
        self.total += 1;
        *self.by_prod.entry(p.clone()).or_default() += 1;
    }

    fn get(&self, p: &Production) -> u64 {
        self.by_prod.get(p).copied().unwrap_or(0)
    }
}

/// Production frequencies from a corpus of programs.
///
/// The base estimate is the add-1 smoothed relative frequency of a
/// production among corpus nodes with the same nonterminal. With
/// `context > 0` the estimate is refined by conditioning on the parent
/// production, the hole's position under it and up to `context` previously
/// applied productions; each longer context interpolates with the shorter
/// one: `p_j = (c_j(prod) + p_{j-1}) / (c_j + 1)`.
#[derive(Debug)]
pub struct FrequencyScorer {
    context: usize,
    base: HashMap<Nonterminal, Counts>,
    conditioned: HashMap<u64, Counts>,
}

fn context_keys<'a>(
    nt: &Nonterminal,
    parent: Option<(&Production, usize)>,
    recent: impl Iterator<Item = &'a Production>,
    k: usize,
) -> Vec<u64> {
    let mut h = DefaultHasher::new();
    nt.hash(&mut h);
    parent.hash(&mut h);
    let mut keys = vec![h.finish()];
    for p in recent.take(k) {
        p.hash(&mut h);
        keys.push(h.finish());
    }
    keys
}

impl FrequencyScorer {
    /// Order-0 scorer: frequencies per nonterminal only.
    pub fn new(corpus: &[Program]) -> Self {
        Self::with_context(corpus, 0)
    }

    pub fn with_context(corpus: &[Program], context: usize) -> Self {
        let mut s = FrequencyScorer { context, base: HashMap::new(), conditioned: HashMap::new() };
        for p in corpus {
            for steps in derivations(p) {
                for (i, step) in steps.iter().enumerate() {
                    s.base.entry(step.nonterminal.clone()).or_default().add(&step.production);
                    if context == 0 {
                        continue;
                    }
                    let parent = step.parent.as_ref().map(|(p, i)| (p, *i));
                    let recent = steps[..i].iter().rev().map(|s| &s.production);
                    for key in context_keys(&step.nonterminal, parent, recent, context) {
                        s.conditioned.entry(key).or_default().add(&step.production);
                    }
                }
            }
        }
        s
    }

    pub fn context(&self) -> usize {
        self.context
    }
}

impl Scorer for FrequencyScorer {
    fn score_extensions(&self, ctx: &HoleContext<'_>, legal: &[Production]) -> Vec<(Production, f64)> {
        let empty = Counts::default();
        let base = self.base.get(ctx.nonterminal).unwrap_or(&empty);
        let denom = (base.total + legal.len() as u64) as f64;
        let mut probs: Vec<f64> = legal.iter().map(|p| (base.get(p) + 1) as f64 / denom).collect();
        if self.context > 0 {
            let recent = ctx.recent(self.context);
            let keys = context_keys(ctx.nonterminal, ctx.parent, recent.into_iter(), self.context);
            for key in keys {
                let Some(c) = self.conditioned.get(&key) else { break };
                for (prob, p) in probs.iter_mut().zip(legal) {
                    *prob = (c.get(p) as f64 + *prob) / (c.total as f64 + 1.0);
                }
            }
        }
        legal.iter().zip(probs).map(|(p, prob)| (p.clone(), prob.ln().min(0.0))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::TypeTag;
    use crate::codec::parse_program;
    use crate::decoder::grammar::{BodyShape, Grammar, ProductionKind, Skeleton};
    use crate::decoder::store::TreeStore;

    fn return_const() -> Program {
        parse_program(r#"{"types":[],"funcs":[["func","int","__main__",[],[],[["return","int",["val","int",1]]]]]}"#)
            .unwrap()
    }

    #[test]
    fn frequent_productions_rank_first() {
        let scorer = FrequencyScorer::new(&[return_const()]);
        let g = Grammar::new(Skeleton::parse("int __main__()").unwrap()).with_body(BodyShape::SingleReturn);
        let mut store = TreeStore::new();
        let t = store.empty_tree(&g.root());
        let legal = g.productions(&g.root());
        let ctx = HoleContext::new(&store, &t, 0, None).unwrap();
        let scored = scorer.score_extensions(&ctx, &legal);
        let one = Production::Const { ty: TypeTag::Int, value: crate::ast::Literal::Int(1) };
        let of = |want: &dyn Fn(&Production) -> bool| scored.iter().find(|(p, _)| want(p)).unwrap().1;
        assert!(of(&|p| *p == one) > of(&|p| p.kind() == ProductionKind::Ternary));
        let total: f64 = scored.iter().map(|(_, lp)| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(scored.iter().all(|(_, lp)| *lp <= 0.0));
    }

    #[test]
    fn uniform_scores_sum_to_one() {
        let g = Grammar::new(Skeleton::parse("int __main__(int a)").unwrap());
        let mut store = TreeStore::new();
        let t = store.empty_tree(&Nonterminal::Expr(TypeTag::Int));
        let legal = g.productions(&Nonterminal::Expr(TypeTag::Int));
        let ctx = HoleContext::new(&store, &t, 0, None).unwrap();
        let total: f64 = UniformScorer.score_extensions(&ctx, &legal).iter().map(|(_, lp)| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
