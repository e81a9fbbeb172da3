#![allow(dead_code)]

use std::path::PathBuf;

use naps_core::ast::{Literal, Program};
use naps_core::codec::parse_program;
use naps_core::decoder::{extend, legal_extensions, project, Grammar, Skeleton, TreeStore};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn program(rel: &str) -> Program {
    parse_program(&fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every `.uast.json` fixture, relative to the fixtures directory.
pub fn all_program_fixtures() -> Vec<String> {
    let mut out = vec!["sample_task.uast.json".to_string()];
    for dir in ["equivalent_pairs", "divergent_pairs"] {
        let mut names: Vec<String> = std::fs::read_dir(fixture_path(dir))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".uast.json"))
            .map(|n| format!("{dir}/{n}"))
            .collect();
        names.sort();
        out.extend(names);
    }
    out
}

pub fn random_grammar() -> Grammar {
    let sk = Skeleton::parse(
        "int __main__(int var0, int* var1, bool var2) vars: int var3, char* var4, char var5, real var6, int var7",
    )
    .unwrap();
    let mut constants = vec![Literal::Bool(false), Literal::Bool(true)];
    constants.extend([-1, 0, 1, 2, 10].map(Literal::Int));
    constants.extend([Literal::Real(0.5), Literal::Real(-2.25), Literal::Char('x'), Literal::Str("a\"b\\c".into())]);
    Grammar::new(sk).with_constants(constants)
}

/// Random leftmost derivation in `g`; once the tree is large, only the
/// smallest-arity productions are taken so that it closes.
pub fn random_program(g: &Grammar, seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = TreeStore::new();
    let mut t = store.empty_tree(&g.root());
    let budget = rng.random_range(5..60);
    while !t.is_complete() {
        let legal = legal_extensions(g, &store, &t, 0).unwrap();
        let choices: Vec<_> = if t.filled + t.holes.len() > budget {
            let min = legal.iter().map(|p| p.arity()).min().unwrap();
            legal.iter().filter(|p| p.arity() == min).collect()
        } else {
            legal.iter().collect()
        };
        let prod = choices[rng.random_range(0..choices.len())].clone();
        t = extend(g, &mut store, &t, 0, &prod, 0.0).unwrap();
    }
    project(g, &store, &t).unwrap()
}
