use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use naps_core::codec::parse_program;
use naps_core::exec::{execute, ExecLimits};
use naps_core::value::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

fn naps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naps")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn golden(name: &str) -> serde_json::Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_prints_the_value() {
    let o = naps(&["run", &fx("sample_task.uast.json"), "--input", "[157]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn run_matches_the_library() {
    let p = parse_program(&std::fs::read_to_string(fx("sample_task.uast.json")).unwrap()).unwrap();
    for x in [0, 26, 1312861] {
        let direct = execute(&p, &[Value::Int(x)], ExecLimits::default()).unwrap();
        let o = naps(&["run", &fx("sample_task.uast.json"), "--input", &format!("[{x}]")]);
        assert_eq!(stdout(&o).trim(), direct.to_string());
    }
}

#[test]
fn runtime_errors_exit_one() {
    let o = naps(&["run", &fx("sample_task.uast.json"), "--input", "[157]", "--limits-steps", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step-limit"));
}

#[test]
fn eval_reports_sample_task() {
    let o = naps(&["eval", &fx("sample_task.uast.json"), "--tests", &fx("sample_task.tests.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3/3 search passed"));
    assert!(stdout(&o).contains("7/7 eval passed"));
}

#[test]
fn json_outputs_match_goldens() {
    let cases = [
        (
            vec!["eval".to_string(), fx("sample_task.uast.json"), "--tests".into(), fx("sample_task.tests.json")],
            "eval_sample_task.json",
        ),
        (vec!["stats".to_string(), fx("corpus.jsonl")], "stats_corpus.json"),
        (vec!["validate".to_string(), fx("divergent_pairs/ex1.inferred.uast.json")], "validate_divergent1.json"),
    ];
    for (args, name) in &cases {
        let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
        args.extend(["--format", "json"]);
        let out: serde_json::Value = serde_json::from_str(&stdout(&naps(&args))).unwrap();
        assert_eq!(out, golden(name), "{name}");
    }
}

#[test]
fn validate_exit_codes() {
    assert_eq!(naps(&["validate", &fx("divergent_pairs/ex1.golden.uast.json")]).status.code(), Some(0));
    let o = naps(&["validate", &fx("divergent_pairs/ex1.inferred.uast.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("type-inconsistency"));

    let dir = std::env::temp_dir().join(format!("naps-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.uast.json");
    std::fs::write(&bad, "{\"types\":[],").unwrap();
    let o = naps(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: parsing"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(naps(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(naps(&["run"]).status.code(), Some(2));
    assert_eq!(naps(&["fmt", "x", "--format", "yaml"]).status.code(), Some(2));
}

#[test]
fn fmt_round_trips() {
    let text = stdout(&naps(&["fmt", &fx("sample_task.uast.json"), "--format", "json"]));
    let original = parse_program(&std::fs::read_to_string(fx("sample_task.uast.json")).unwrap()).unwrap();
    assert_eq!(parse_program(&text).unwrap(), original);
    let pretty = stdout(&naps(&["fmt", &fx("sample_task.uast.json")]));
    assert!(pretty.starts_with("int __main__(int var0)"));
}

#[test]
fn gen_stmt_is_seeded() {
    let args = ["gen-stmt", &fx("sample_task.uast.json"), "--seed", "7", "--n", "3"];
    let a = stdout(&naps(&args));
    assert_eq!(a, stdout(&naps(&args)));
    assert_eq!(a.lines().count(), 3);
    assert!(a.lines().all(|l| l == l.to_lowercase()));
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&naps(&["gen-stmt", &fx("sample_task.uast.json"), "--format", "json"]))).unwrap();
    assert!(j["statements"][0].as_array().unwrap().iter().all(|t| t.is_string()));
}

#[test]
fn decode_demo_runs() {
    let o = naps(&[
        "decode-demo",
        "--corpus",
        &fixtures().to_string_lossy(),
        "--schema",
        "int __main__(int var0) vars: int var1, int var2, int var3",
        "--capacity",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(j["count"].as_u64().unwrap() > 0);
    assert!(parse_program(&j["results"][0]["program"].to_string()).is_ok());
}

fn post(addr: &str, path: &str, body: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(
        s,
        "POST {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut reply = String::new();
    s.read_to_string(&mut reply).unwrap();
    reply
}

#[test]
fn serve_judges_requests() {
    let mut child =
        Command::new(env!("CARGO_BIN_EXE_naps")).args(["serve", "--port", "0"]).stdout(Stdio::piped()).spawn().unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().trim_start_matches("listening on http://").to_string();

    let program = std::fs::read_to_string(fx("sample_task.uast.json")).unwrap();
    let tests = std::fs::read_to_string(fx("sample_task.tests.json")).unwrap();
    let run = post(&addr, "/run", &format!(r#"{{"program":{program},"input":[157]}}"#));
    let eval = post(&addr, "/eval", &format!(r#"{{"program":{program},"tests":{tests}}}"#));
    let bad = post(&addr, "/run", "{}");
    child.kill().unwrap();
    let _ = child.wait();

    assert!(run.starts_with("HTTP/1.1 200"), "{run}");
    assert!(run.ends_with(r#"{"output":3}"#), "{run}");
    let body: serde_json::Value = serde_json::from_str(eval.split("\r\n\r\n").nth(1).unwrap()).unwrap();
    assert_eq!(body["eval"]["passed"], 7);
    assert!(bad.starts_with("HTTP/1.1 400"), "{bad}");
}
