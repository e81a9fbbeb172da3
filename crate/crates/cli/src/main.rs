//! `naps`: command-line front end for the UAST toolchain.

mod ops;
mod serve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use naps_core::ast::Program;
use naps_core::check::{lint, validate};
use naps_core::codec::{emit_program_pretty, parse_program};
use naps_core::data::{compute_stats, load_corpus};
use naps_core::decoder::{decode, FrequencyScorer, Grammar, SearchConfig, Skeleton};
use naps_core::exec::ExecLimits;
use naps_core::harness::{run_tests, select_candidate, TestBundle};
use naps_core::pretty::pretty_print;
use naps_core::stmtgen::{generate_batch, mean_length};
use serde_json::{json, Value as Json};

#[derive(Parser)]
#[command(name = "naps", version, about = "Validate, run, judge and decode UAST programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Step limit per execution.
    #[arg(long, global = true)]
    limits_steps: Option<u64>,
    /// Heap cell limit per execution.
    #[arg(long, global = true)]
    limits_heap: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a program; exits 0 iff there are no errors.
    Validate { program: PathBuf },
    /// Pretty-print a program (canonical JSON with --format json).
    Fmt { program: PathBuf },
    /// Execute a program's __main__.
    Run {
        program: PathBuf,
        /// JSON list of arguments, or a path to a file holding one.
        #[arg(long)]
        input: String,
    },
    /// Run a program against a tests file.
    Eval {
        program: PathBuf,
        #[arg(long)]
        tests: PathBuf,
    },
    /// Corpus statistics for a .jsonl dataset.
    Stats { corpus: PathBuf },
    /// Generate problem statements from a program.
    GenStmt {
        program: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Decode programs for a signature with a corpus-trained frequency scorer.
    DecodeDemo {
        /// Directory of .jsonl corpora and .uast.json programs.
        #[arg(long)]
        corpus: PathBuf,
        /// Signature, e.g. "int __main__(int var0) vars: int var1".
        #[arg(long)]
        schema: String,
        #[arg(long, default_value_t = 64)]
        capacity: usize,
        #[arg(long, default_value_t = 64)]
        expansions: usize,
        #[arg(long, default_value_t = 256)]
        max_nodes: usize,
        /// Previous productions the scorer conditions on (0 = plain frequencies).
        #[arg(long, default_value_t = 8)]
        context: usize,
        /// Number of decoded programs to print.
        #[arg(long, default_value_t = 3)]
        top: usize,
        /// Tests file used to select a candidate.
        #[arg(long)]
        tests: Option<PathBuf>,
    },
    /// Serve POST /run and POST /eval on 127.0.0.1.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn read_program(path: &Path) -> Result<Program> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json(v: &Json) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn load_dir_corpus(dir: &Path) -> Result<Vec<Program>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.sort();
    let mut programs = Vec::new();
    for path in paths {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.ends_with(".jsonl") {
            let records = load_corpus(&path).with_context(|| format!("loading {}", path.display()))?;
            programs.extend(records.into_iter().map(|r| r.solution));
        } else if name.ends_with(".uast.json") {
            programs.push(read_program(&path)?);
        }
    }
    if programs.is_empty() {
        bail!("no programs found in {}", dir.display());
    }
    Ok(programs)
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let mut limits = ExecLimits::default();
    if let Some(s) = cli.limits_steps {
        limits.max_steps = s;
    }
    if let Some(h) = cli.limits_heap {
        limits.max_heap_cells = h;
    }
    let json_out = cli.format == Format::Json;
    match cli.command {
        Command::Validate { program } => {
            let p = read_program(&program)?;
            let clean = validate(&p).is_empty();
            let diags = lint(&p);
            if json_out {
                let list: Vec<Json> = diags
                    .iter()
                    .map(|d| json!({"severity": d.severity.to_string(), "code": d.code, "path": d.path, "message": d.message}))
                    .collect();
                print_json(&json!({"clean": clean, "diagnostics": list}));
            } else {
                for d in &diags {
                    println!("{}: {d}", d.severity);
                }
                if clean {
                    println!("ok");
                }
            }
            return Ok(if clean { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Fmt { program } => {
            let p = read_program(&program)?;
            if json_out {
                println!("{}", emit_program_pretty(&p));
            } else {
                print!("{}", pretty_print(&p));
            }
        }
        Command::Run { program, input } => {
            let p = read_program(&program)?;
            let text = match serde_json::from_str::<Json>(&input) {
                Ok(_) => input,
                Err(_) => std::fs::read_to_string(&input).with_context(|| format!("reading input {input}"))?,
            };
            let input: Json = serde_json::from_str(&text).context("input is not JSON")?;
            match ops::run(&p, &input, limits)? {
                Ok(v) if json_out => print_json(&json!({"output": v.to_json()})),
                Ok(v) => println!("{v}"),
                Err(e) => bail!("runtime error: {e}"),
            }
        }
        Command::Eval { program, tests } => {
            let p = read_program(&program)?;
            let text = std::fs::read_to_string(&tests).with_context(|| format!("reading {}", tests.display()))?;
            let tests = TestBundle::parse(&text, &p)?;
            let summary = ops::eval(&p, &tests, limits)?;
            if json_out {
                print_json(&summary.to_json());
            } else {
                print!("{}", summary.to_text());
            }
        }
        Command::Stats { corpus } => {
            let stats = compute_stats(&load_corpus(&corpus)?)?;
            if json_out {
                print_json(&stats.to_json());
            } else {
                print!("{}", stats.to_text());
            }
        }
        Command::GenStmt { program, n } => {
            if n == 0 {
                bail!("--n must be at least 1");
            }
            let p = read_program(&program)?;
            let batch = generate_batch(&p, n, cli.seed);
            if json_out {
                let statements: Vec<Json> = batch.iter().map(|s| s.to_json()).collect();
                let fallback = batch.iter().any(|s| s.fallback);
                print_json(
                    &json!({"statements": statements, "mean_length": mean_length(&batch), "fallback": fallback}),
                );
            } else {
                for s in &batch {
                    println!("{}", s.text());
                }
                if batch.iter().any(|s| s.fallback) {
                    eprintln!("note: some nodes had no template and were rendered literally");
                }
            }
        }
        Command::DecodeDemo { corpus, schema, capacity, expansions, max_nodes, context, top, tests } => {
            let corpus = load_dir_corpus(&corpus)?;
            let skeleton = Skeleton::parse(&schema)?;
            let grammar = Grammar::new(skeleton).with_corpus_constants(&corpus);
            let scorer = FrequencyScorer::with_context(&corpus, context);
            let cfg =
                SearchConfig { queue_capacity: capacity, expansions_per_step: expansions, max_tree_nodes: max_nodes };
            let results = decode(&scorer, &cfg, &grammar)?;
            let selected = match &tests {
                None => None,
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let Some(first) = results.first() else { bail!("nothing decoded") };
                    let bundle = TestBundle::parse(&text, &first.program)?;
                    let programs: Vec<Program> = results.iter().map(|d| d.program.clone()).collect();
                    Some(
                        select_candidate(&programs, &bundle.search, limits)
                            .map(|i| (i, run_tests(&programs[i], &bundle.eval, limits), bundle.eval.len())),
                    )
                }
            };
            if json_out {
                let shown: Vec<Json> = results
                    .iter()
                    .take(top)
                    .enumerate()
                    .map(|(rank, d)| {
                        json!({"rank": rank, "score": d.score, "nodes": d.nodes, "program": naps_core::codec::program_to_json(&d.program)})
                    })
                    .collect();
                let sel = match selected {
                    Some(Some((i, passed, total))) => json!({"rank": i, "eval_passed": passed, "eval_total": total}),
                    _ => Json::Null,
                };
                print_json(&json!({"count": results.len(), "results": shown, "selected": sel}));
            } else {
                println!("decoded {} programs", results.len());
                for (rank, d) in results.iter().take(top).enumerate() {
                    println!("# rank {rank}, log-probability {:.3}, {} nodes", d.score, d.nodes);
                    print!("{}", pretty_print(&d.program));
                }
                match selected {
                    Some(Some((i, passed, total))) => {
                        println!("selected rank {i}: {passed}/{total} eval passed");
                        print!("{}", pretty_print(&results[i].program));
                    }
                    Some(None) => println!("no decoded program passes the search tests"),
                    None => {}
                }
            }
        }
        Command::Serve { port } => serve::serve(port, limits)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
