//! Dataset records in JSON Lines form and corpus statistics.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::ast::{count_lines, Program, VarDecl};
use crate::check::{entry_schema, EntrySchema};
use crate::codec::{parse_type, program_from_json, program_to_json};
use crate::harness::TestBundle;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub solution: Program,
    pub is_partial: bool,
    /// `None` exactly when the record is partial.
    pub tests: Option<TestBundle>,
    pub schema: Option<EntrySchema>,
    pub statement: Option<Vec<String>>,
    pub url: String,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{} malformed line(s); first: {}", .0.len(), .0[0])]
    Corpus(Vec<DataError>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("statistics need at least one record")]
    EmptyCorpus,
}

fn schema_to_json(s: &EntrySchema) -> Json {
    json!({
        "args": s.params.iter().map(|p| json!([p.ty.to_string(), p.name])).collect::<Vec<_>>(),
        "return": s.return_type.to_string(),
    })
}

fn schema_from_json(v: &Json) -> Result<EntrySchema, String> {
    let args = v.get("args").and_then(Json::as_array).ok_or("schema: missing args")?;
    let params = args
        .iter()
        .map(|a| match a.as_array().map(Vec::as_slice) {
            Some([Json::String(t), Json::String(n)]) => {
                Ok(VarDecl::new(parse_type(t).map_err(|e| format!("schema: {e}"))?, n.clone()))
            }
            _ => Err("schema: argument must be [type, name]".to_string()),
        })
        .collect::<Result<_, _>>()?;
    let ret = v.get("return").and_then(Json::as_str).ok_or("schema: missing return")?;
    let return_type = parse_type(ret).map_err(|e| format!("schema: {e}"))?;
    Ok(EntrySchema { params, return_type })
}

impl DatasetRecord {
    pub fn from_json(v: &Json) -> Result<Self, String> {
        let obj = v.as_object().ok_or("record must be an object")?;
        const KEYS: [&str; 7] = ["solution", "is_partial", "search_tests", "eval_tests", "schema", "statement", "url"];
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(format!("unknown field {k:?}"));
        }
        let solution =
            program_from_json(obj.get("solution").ok_or("missing solution")?).map_err(|e| format!("solution: {e}"))?;
        let is_partial = obj.get("is_partial").and_then(Json::as_bool).ok_or("missing is_partial")?;
        let url = obj.get("url").and_then(Json::as_str).ok_or("missing url")?.to_string();

        let schema = match obj.get("schema") {
            None => None,
            Some(s) => Some(schema_from_json(s)?),
        };
        if let Ok(actual) = entry_schema(&solution) {
            match &schema {
                Some(s) if *s != actual => return Err(format!("schema {s} disagrees with solution {actual}")),
                _ => {}
            }
        }

        let has_tests = obj.contains_key("search_tests") || obj.contains_key("eval_tests");
        let tests = match (is_partial, has_tests) {
            (true, true) => return Err("partial solution must not carry tests".into()),
            (true, false) => None,
            (false, false) => return Err("full solution without tests".into()),
            (false, true) => {
                let s = match &schema {
                    Some(s) => s.clone(),
                    None => entry_schema(&solution).map_err(|e| e.to_string())?,
                };
                Some(TestBundle::from_json(v, &s, &solution.records).map_err(|e| e.to_string())?)
            }
        };

        let statement = match obj.get("statement") {
            None => None,
            Some(Json::Array(toks)) => Some(
                toks.iter()
                    .map(|t| t.as_str().map(str::to_string).ok_or("statement tokens must be strings"))
                    .collect::<Result<_, _>>()?,
            ),
            Some(_) => return Err("statement must be a token list".into()),
        };
        Ok(DatasetRecord { solution, is_partial, tests, schema, statement, url })
    }

    pub fn to_json(&self) -> Json {
        let mut obj = Map::new();
        obj.insert("solution".into(), program_to_json(&self.solution));
        obj.insert("is_partial".into(), Json::Bool(self.is_partial));
        if let Some(t) = &self.tests {
            if let Json::Object(groups) = t.to_json() {
                obj.extend(groups);
            }
        }
        if let Some(s) = &self.schema {
            obj.insert("schema".into(), schema_to_json(s));
        }
        if let Some(st) = &self.statement {
            obj.insert("statement".into(), Json::from(st.clone()));
        }
        obj.insert("url".into(), Json::String(self.url.clone()));
        Json::Object(obj)
    }
}

/// Parses JSON Lines text. Blank lines are skipped. Every malformed line is
/// collected, and the result is an error if there was any.
pub fn parse_corpus(text: &str) -> Result<Vec<DatasetRecord>, DataError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed =
            serde_json::from_str::<Json>(line).map_err(|e| e.to_string()).and_then(|v| DatasetRecord::from_json(&v));
        match parsed {
            Ok(r) => records.push(r),
            Err(msg) => errors.push(DataError::Line { line: i + 1, msg }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(DataError::Corpus(errors))
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>, DataError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// Canonical encoding: one compact JSON object per line, newline terminated.
pub fn encode_corpus(records: &[DatasetRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json().to_string());
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[DatasetRecord]) -> Result<(), DataError> {
    Ok(std::fs::write(path, encode_corpus(records))?)
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        if xs.is_empty() {
            return Summary::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Summary { count: xs.len(), mean, std: var.sqrt() }
    }

    fn to_json(self) -> Json {
        json!({"count": self.count, "mean": self.mean, "std": self.std})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub n_records: usize,
    pub n_partial: usize,
    pub stmt_len: Summary,
    pub loc: Summary,
    pub tests: Summary,
}

pub fn compute_stats(records: &[DatasetRecord]) -> Result<CorpusStats, DataError> {
    if records.is_empty() {
        return Err(DataError::EmptyCorpus);
    }
    let stmt: Vec<f64> = records.iter().filter_map(|r| r.statement.as_ref()).map(|s| s.len() as f64).collect();
    let loc: Vec<f64> = records.iter().map(|r| count_lines(&r.solution) as f64).collect();
    let tests: Vec<f64> = records.iter().filter_map(|r| r.tests.as_ref()).map(|t| t.len() as f64).collect();
    Ok(CorpusStats {
        n_records: records.len(),
        n_partial: records.iter().filter(|r| r.is_partial).count(),
        stmt_len: Summary::of(&stmt),
        loc: Summary::of(&loc),
        tests: Summary::of(&tests),
    })
}

impl CorpusStats {
    pub fn to_json(&self) -> Json {
        json!({
            "n_records": self.n_records,
            "n_partial": self.n_partial,
            "statement_length": self.stmt_len.to_json(),
            "lines_of_code": self.loc.to_json(),
            "tests": self.tests.to_json(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<32} {:>8}", "Number of records", self.n_records);
        let _ = writeln!(out, "{:<32} {:>8}", "Number of partial solutions", self.n_partial);
        for (label, s) in [
            ("Statement length (tokens)", self.stmt_len),
            ("Lines of code per solution", self.loc),
            ("Inputs/outputs per solution", self.tests),
        ] {
            let _ = writeln!(out, "{label:<32} {:>8.2} ± {:.2}", s.mean, s.std);
        }
        out
    }
}
