//! Toolchain for UAST programs: a JSON codec and pretty printer, a static
//! checker, a reference interpreter, an evaluation harness over input/output
//! tests, a grammar-guided tree decoder, a templated statement generator and
//! dataset utilities.

pub mod ast;
pub mod check;
pub mod codec;
pub mod data;
pub mod decoder;
pub mod exec;
pub mod harness;
pub mod pretty;
pub mod stmtgen;
pub mod typing;
pub mod value;
