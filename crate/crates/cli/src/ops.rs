//! Operations shared by the subcommands and the HTTP judge.

use anyhow::{anyhow, bail, Context, Result};
use naps_core::ast::Program;
use naps_core::check::entry_schema;
use naps_core::codec::program_from_json;
use naps_core::exec::{execute, ExecLimits};
use naps_core::harness::{judge_task, run_tests, EvalReport, TestBundle};
use naps_core::value::Value;
use serde_json::{json, Value as Json};

pub fn decode_inputs(p: &Program, input: &Json) -> Result<Vec<Value>> {
    let schema = entry_schema(p)?;
    let items = input.as_array().ok_or_else(|| anyhow!("input must be a JSON list of arguments"))?;
    if items.len() != schema.params.len() {
        bail!("{} arguments given, {schema} takes {}", items.len(), schema.params.len());
    }
    items
        .iter()
        .zip(&schema.params)
        .map(|(v, d)| Value::from_json(v, &d.ty, &p.records).with_context(|| format!("argument {}", d.name)))
        .collect()
}

/// Runs `p`; the outer error is a bad request, the inner one a runtime error.
pub fn run(p: &Program, input: &Json, limits: ExecLimits) -> Result<Result<Value, naps_core::exec::RuntimeError>> {
    let args = decode_inputs(p, input)?;
    Ok(execute(p, &args, limits))
}

pub struct EvalSummary {
    pub search: (usize, usize),
    pub eval: (usize, usize),
    pub report: EvalReport,
}

pub fn eval(p: &Program, tests: &TestBundle, limits: ExecLimits) -> Result<EvalSummary> {
    let search = (run_tests(p, &tests.search, limits), tests.search.len());
    let eval = (run_tests(p, &tests.eval, limits), tests.eval.len());
    let report = EvalReport::new(vec![judge_task("program", std::slice::from_ref(p), tests, limits)])?;
    Ok(EvalSummary { search, eval, report })
}

impl EvalSummary {
    pub fn to_json(&self) -> Json {
        json!({
            "search": {"passed": self.search.0, "total": self.search.1},
            "eval": {"passed": self.eval.0, "total": self.eval.1},
            "report": self.report.to_json(),
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "{}/{} search passed\n{}/{} eval passed\n{}",
            self.search.0,
            self.search.1,
            self.eval.0,
            self.eval.1,
            self.report.to_text()
        )
    }
}

pub fn run_response(p: &Json, input: &Json, limits: ExecLimits) -> Result<Json> {
    let p = program_from_json(p)?;
    Ok(match run(&p, input, limits)? {
        Ok(v) => json!({"output": v.to_json()}),
        Err(e) => json!({"error": e.kind.as_str(), "detail": e.detail}),
    })
}

pub fn eval_response(p: &Json, tests: &Json, limits: ExecLimits) -> Result<Json> {
    let p = program_from_json(p)?;
    let schema = entry_schema(&p)?;
    let tests = TestBundle::from_json(tests, &schema, &p.records)?;
    Ok(eval(&p, &tests, limits)?.to_json())
}
