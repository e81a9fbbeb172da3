//! Judging programs against input/output examples.
//!
//! A task's examples come in two groups: `search` examples may be used to
//! pick a candidate, `eval` examples are held out and are the only ones the
//! metrics look at.

use std::fmt::Write as _;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::ast::{Program, RecordDecl};
use crate::check::{self, EntrySchema};
use crate::exec::{execute, ExecLimits};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct IoExample {
    pub input: Vec<Value>,
    pub output: Value,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TestBundle {
    pub search: Vec<IoExample>,
    pub eval: Vec<IoExample>,
}

/// Output comparison for real leaves: `|expected - actual| <= max(rel * |expected|, abs)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-6, abs: 1e-6 }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("malformed tests: {0}")]
    Malformed(String),
    #[error("{group}[{index}]: {msg}")]
    Example { group: &'static str, index: usize, msg: String },
    #[error("metrics need at least one task")]
    EmptyTaskSet,
}

impl IoExample {
    pub fn to_json(&self) -> Json {
        json!({
            "input": self.input.iter().map(Value::to_json).collect::<Vec<_>>(),
            "output": self.output.to_json(),
        })
    }

    /// Decodes `{"input":[...],"output":...}` against the entry schema.
    pub fn from_json(v: &Json, schema: &EntrySchema, records: &[RecordDecl]) -> Result<Self, String> {
        let inputs = v.get("input").and_then(Json::as_array).ok_or("missing input list")?;
        if inputs.len() != schema.params.len() {
            return Err(format!("{} inputs given, {} expected by {schema}", inputs.len(), schema.params.len()));
        }
        let input = inputs
            .iter()
            .zip(&schema.params)
            .map(|(x, p)| Value::from_json(x, &p.ty, records).map_err(|e| format!("{}: {e}", p.name)))
            .collect::<Result<_, _>>()?;
        let out = v.get("output").ok_or("missing output")?;
        let output = Value::from_json(out, &schema.return_type, records).map_err(|e| format!("output: {e}"))?;
        Ok(IoExample { input, output })
    }
}

impl TestBundle {
    pub fn len(&self) -> usize {
        self.search.len() + self.eval.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> Json {
        json!({
            "search_tests": self.search.iter().map(IoExample::to_json).collect::<Vec<_>>(),
            "eval_tests": self.eval.iter().map(IoExample::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Json, schema: &EntrySchema, records: &[RecordDecl]) -> Result<Self, HarnessError> {
        let group = |key: &'static str| -> Result<Vec<IoExample>, HarnessError> {
            let items = match v.get(key) {
                None => return Ok(Vec::new()),
                Some(items) => {
                    items.as_array().ok_or_else(|| HarnessError::Malformed(format!("{key} is not a list")))?
                }
            };
            items
                .iter()
                .enumerate()
                .map(|(index, x)| {
                    IoExample::from_json(x, schema, records).map_err(|msg| HarnessError::Example {
                        group: key,
                        index,
                        msg,
                    })
                })
                .collect()
        };
        Ok(TestBundle { search: group("search_tests")?, eval: group("eval_tests")? })
    }

    /// Parses a tests file for program `p`.
    pub fn parse(text: &str, p: &Program) -> Result<Self, HarnessError> {
        let v: Json = serde_json::from_str(text).map_err(|e| HarnessError::Malformed(e.to_string()))?;
        let schema = check::entry_schema(p).map_err(|e| HarnessError::Malformed(e.to_string()))?;
        Self::from_json(&v, &schema, &p.records)
    }
}

/// Whether `p` produces the expected output on one example.
pub fn passes(p: &Program, ex: &IoExample, limits: ExecLimits, tol: Tolerance) -> bool {
    match execute(p, &ex.input, limits) {
        Ok(out) => ex.output.approx_eq(&out, tol.rel, tol.abs),
        Err(_) => false,
    }
}

/// Number of examples `p` passes under the default tolerance.
pub fn run_tests(p: &Program, examples: &[IoExample], limits: ExecLimits) -> usize {
    run_tests_with(p, examples, limits, Tolerance::default())
}

pub fn run_tests_with(p: &Program, examples: &[IoExample], limits: ExecLimits, tol: Tolerance) -> usize {
    examples.iter().filter(|ex| passes(p, ex, limits, tol)).count()
}

/// Index of the first candidate with no shape errors that passes every
/// search example.
pub fn select_candidate(candidates: &[Program], search: &[IoExample], limits: ExecLimits) -> Option<usize> {
    candidates.iter().position(|c| {
        !check::validate(c).iter().any(|d| d.is_shape_error()) && run_tests(c, search, limits) == search.len()
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskResult {
    pub id: String,
    pub eval_passed: usize,
    pub eval_total: usize,
    pub selected: bool,
}

impl TaskResult {
    pub fn passes_all(&self) -> bool {
        self.selected && self.eval_passed == self.eval_total
    }

    pub fn passes_half(&self) -> bool {
        self.selected && 2 * self.eval_passed >= self.eval_total
    }
}

/// Selects among `candidates` with the search split and scores the choice
/// on the eval split.
pub fn judge_task(id: &str, candidates: &[Program], tests: &TestBundle, limits: ExecLimits) -> TaskResult {
    match select_candidate(candidates, &tests.search, limits) {
        Some(i) => TaskResult {
            id: id.to_string(),
            eval_passed: run_tests(&candidates[i], &tests.eval, limits),
            eval_total: tests.eval.len(),
            selected: true,
        },
        None => TaskResult { id: id.to_string(), eval_passed: 0, eval_total: tests.eval.len(), selected: false },
    }
}

/// `(accuracy, accuracy50)` over a task set.
pub fn compute_metrics(results: &[TaskResult]) -> Result<(f64, f64), HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyTaskSet);
    }
    let n = results.len() as f64;
    let all = results.iter().filter(|r| r.passes_all()).count() as f64;
    let half = results.iter().filter(|r| r.passes_half()).count() as f64;
    Ok((all / n, half / n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub per_program: Vec<TaskResult>,
    pub accuracy: f64,
    pub accuracy50: f64,
}

impl EvalReport {
    pub fn new(per_program: Vec<TaskResult>) -> Result<Self, HarnessError> {
        let (accuracy, accuracy50) = compute_metrics(&per_program)?;
        Ok(EvalReport { per_program, accuracy, accuracy50 })
    }

    pub fn to_json(&self) -> Json {
        json!({
            "per_program": self.per_program.iter().map(|r| json!({
                "id": r.id,
                "eval_passed": r.eval_passed,
                "eval_total": r.eval_total,
                "selected": r.selected,
            })).collect::<Vec<_>>(),
            "accuracy": self.accuracy,
            "accuracy50": self.accuracy50,
        })
    }

    pub fn to_text(&self) -> String {
        let width = self.per_program.iter().map(|r| r.id.len()).max().unwrap_or(0).max(7);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>8}  selected", "program", "eval");
        for r in &self.per_program {
            let frac = format!("{}/{}", r.eval_passed, r.eval_total);
            let _ = writeln!(out, "{:<width$}  {:>8}  {}", r.id, frac, if r.selected { "yes" } else { "no" });
        }
        let _ = writeln!(out, "accuracy    {:.4}", self.accuracy);
        let _ = writeln!(out, "accuracy50  {:.4}", self.accuracy50);
        out
    }
}
