//! `adgene`: pipeline driver.
//!
//! Exit codes: 0 success, 1 domain error (`error: <code>: <message>` on
//! stderr), 2 usage error.

use std::fmt::Display;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adgene_core::corpora::{export_jsonl, generate, import_jsonl, split_corpus, Corpus, TemplateSet};
use adgene_core::engines::{backend_by_name, dispatch};
use adgene_core::eval::{build_report, compare_ratings, RatingSet};
use adgene_core::ingest::Manifest;
use adgene_core::router::{read_training_jsonl, train_router, RouterModel, DEFAULT_SMOOTHING};
use adgene_core::{KnowledgeBase, TaskLabel};
use adgene_service::ServiceConfig;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "adgene",
    version,
    about = "Alzheimer's gene-region knowledge base and question answering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a dataset manifest; print table counts.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Build a knowledge-base snapshot from a manifest.
    BuildKb {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the manifest's q-value threshold.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Generate one task's instruction corpus as JSONL.
    GenCorpus {
        #[command(flatten)]
        kb: KbArg,
        /// 1-4 or Task1-Task4.
        #[arg(long, value_parser = parse_task)]
        task: TaskLabel,
        /// `standard`, `paraphrases` or a template TOML file.
        #[arg(long, default_value = "standard")]
        templates: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a corpus into train and test JSONL files.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        test_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Fit the query router on corpus JSONL files.
    TrainRouter {
        #[arg(long = "train", required = true, num_args = 1..)]
        train: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the engines on test corpora and write a report.
    Evaluate {
        #[command(flatten)]
        kb: KbArg,
        #[command(flatten)]
        router: RouterArg,
        #[arg(long = "test", required = true, num_args = 1..)]
        test: Vec<PathBuf>,
        /// Expert ratings of the baseline system (CSV).
        #[arg(long, requires = "ratings_b")]
        ratings_a: Option<PathBuf>,
        /// Expert ratings of the compared system (CSV).
        #[arg(long, requires = "ratings_a")]
        ratings_b: Option<PathBuf>,
        #[arg(long, default_value_t = 0.95)]
        ci_level: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Answer one question and print the answer as JSON.
    Query {
        #[command(flatten)]
        kb: KbArg,
        #[command(flatten)]
        router: RouterArg,
        #[arg(long)]
        text: String,
        #[arg(long, default_value = "grounded-template")]
        backend: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

#[derive(Args)]
struct KbArg {
    #[arg(long = "kb", env = "ADGPT_KB", default_value = "kb.snap")]
    kb: PathBuf,
}

#[derive(Args)]
struct RouterArg {
    #[arg(long = "router", env = "ADGPT_ROUTER", default_value = "router.json")]
    router: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// TOML configuration; `ADGPT_*` variables override it.
    #[arg(long, conflicts_with_all = ["kb", "router"])]
    config: Option<PathBuf>,
    #[arg(long)]
    kb: Option<PathBuf>,
    #[arg(long)]
    router: Option<PathBuf>,
    #[arg(long)]
    bind: Option<String>,
}

fn parse_task(s: &str) -> Result<TaskLabel, String> {
    if let Ok(n) = s.parse::<usize>() {
        return n
            .checked_sub(1)
            .and_then(TaskLabel::from_index)
            .ok_or_else(|| format!("task must be 1-4, got {n}"));
    }
    s.parse().map_err(|e: adgene_core::task::ParseTaskError| e.to_string())
}

struct Failure {
    code: &'static str,
    message: String,
}

fn fail<E: Display>(code: &'static str) -> impl FnOnce(E) -> Failure {
    move |e| Failure {
        code,
        message: e.to_string(),
    }
}

fn load_kb(path: &Path, alpha: Option<f64>) -> Result<KnowledgeBase, Failure> {
    let kb = KnowledgeBase::load(path).map_err(|e| Failure {
        code: "kb_invalid",
        message: format!("{}: {e}", path.display()),
    })?;
    match alpha {
        Some(a) => kb.with_alpha(a).map_err(fail("bad_alpha")),
        None => Ok(kb),
    }
}

fn load_router(path: &Path) -> Result<RouterModel, Failure> {
    RouterModel::load(path).map_err(|e| Failure {
        code: "router_invalid",
        message: format!("{}: {e}", path.display()),
    })
}

fn template_set(spec: &str) -> Result<TemplateSet, Failure> {
    match spec {
        "standard" => Ok(TemplateSet::standard()),
        "paraphrases" => Ok(TemplateSet::paraphrases()),
        path => TemplateSet::load(path).map_err(fail("templates_invalid")),
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serialises"));
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Ingest { manifest } => {
            let ds = Manifest::load(&manifest)
                .and_then(|m| m.read_dataset())
                .map_err(fail("ingest_failed"))?;
            let qtl_files: Vec<_> = ds
                .qtl_file_counts
                .iter()
                .map(|(p, n)| json!({ "path": p, "rows": n }))
                .collect();
            print_json(&json!({
                "seed_genes": ds.seed.len(),
                "annotations": ds.annotations.len(),
                "qtl_records": ds.qtls.len(),
                "molecular_genetics_records": ds.omim.len(),
                "significance_alpha": ds.significance_alpha,
                "qtl_files": qtl_files,
            }));
        }
        Command::BuildKb { manifest, out, alpha } => {
            let kb = Manifest::load(&manifest)
                .and_then(|m| m.read_dataset())
                .map_err(fail("ingest_failed"))?
                .build(alpha)
                .map_err(fail("kb_invalid"))?;
            kb.save(&out).map_err(fail("io"))?;
            print_json(&json!({
                "out": out,
                "kb_hash": kb.snapshot_hash(),
                "genes": kb.seed_genes().len(),
                "qtl_records": kb.qtl_count(),
                "significance_alpha": kb.significance_alpha(),
            }));
        }
        Command::GenCorpus {
            kb,
            task,
            templates,
            out,
        } => {
            let kb = load_kb(&kb.kb, None)?;
            let corpus = generate(&kb, &template_set(&templates)?, task, 0).map_err(fail("corpus_failed"))?;
            export_jsonl(&corpus, &out).map_err(fail("io"))?;
            print_json(&json!({ "out": out, "task": task, "count": corpus.len() }));
        }
        Command::Split {
            input,
            test_fraction,
            seed,
            train_out,
            test_out,
        } => {
            let corpus = import_jsonl(&input).map_err(fail("corpus_invalid"))?;
            let (train, test) = split_corpus(&corpus, test_fraction, seed).map_err(fail("bad_fraction"))?;
            export_jsonl(&train, &train_out).map_err(fail("io"))?;
            export_jsonl(&test, &test_out).map_err(fail("io"))?;
            print_json(&json!({ "train": train.len(), "test": test.len(), "seed": seed }));
        }
        Command::TrainRouter { train, smoothing, out } => {
            let mut rows = Vec::new();
            for p in &train {
                let f = File::open(p).map_err(|e| Failure {
                    code: "io",
                    message: format!("{}: {e}", p.display()),
                })?;
                rows.extend(read_training_jsonl(BufReader::new(f)).map_err(fail("training_data_invalid"))?);
            }
            let model =
                train_router(rows.iter().map(|(q, t)| (q.as_str(), *t)), smoothing).map_err(fail("router_invalid"))?;
            model.save(&out).map_err(fail("io"))?;
            print_json(&json!({
                "out": out,
                "examples": rows.len(),
                "vocabulary": model.vocabulary_len(),
                "router_hash": model.snapshot_hash(),
            }));
        }
        Command::Evaluate {
            kb,
            router,
            test,
            ratings_a,
            ratings_b,
            ci_level,
            out,
        } => {
            let kb = load_kb(&kb.kb, None)?;
            let router = load_router(&router.router)?;
            let tests: Vec<Corpus> = test
                .iter()
                .map(|p| import_jsonl(p).map_err(fail("corpus_invalid")))
                .collect::<Result<_, _>>()?;
            let statistics = match (ratings_a, ratings_b) {
                (Some(a), Some(b)) => {
                    let a = RatingSet::load(a).map_err(fail("ratings_invalid"))?;
                    let b = RatingSet::load(b).map_err(fail("ratings_invalid"))?;
                    Some(compare_ratings(&a, &b, ci_level).map_err(fail("statistics_failed"))?)
                }
                _ => None,
            };
            let backend = backend_by_name("grounded-template").expect("default backend exists");
            let report = build_report(&kb, &router, backend.as_ref(), &tests, statistics);
            let text = serde_json::to_string_pretty(&report).expect("report serialises");
            std::fs::write(&out, text + "\n").map_err(fail("io"))?;
            let tasks: Vec<_> = report
                .tasks
                .iter()
                .map(|t| json!({ "task": t.task, "n": t.n, "exact_match_accuracy": t.exact_match_accuracy }))
                .collect();
            print_json(&json!({ "out": out, "tasks": tasks }));
        }
        Command::Serve(args) => {
            let config = match args.config {
                Some(p) => ServiceConfig::load(p),
                None => Ok(ServiceConfig::new(
                    args.kb.unwrap_or_else(|| "kb.snap".into()),
                    args.router.unwrap_or_else(|| "router.json".into()),
                )),
            }
            .map_err(|e| Failure {
                code: e.code,
                message: e.message,
            })?;
            let mut config = config.with_env(|k| std::env::var(k).ok());
            if let Some(b) = args.bind {
                config.bind = b;
            }
            tracing_subscriber::fmt()
                .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
                .with_writer(std::io::stderr)
                .init();
            let rt = tokio::runtime::Runtime::new().map_err(fail("runtime"))?;
            rt.block_on(adgene_service::serve(config)).map_err(|e| Failure {
                code: e.code,
                message: e.message,
            })?;
        }
        Command::Query {
            kb,
            router,
            text,
            backend,
            alpha,
        } => {
            let kb = load_kb(&kb.kb, alpha)?;
            let router = load_router(&router.router)?;
            let backend = backend_by_name(&backend).ok_or_else(|| Failure {
                code: "unknown_backend",
                message: backend.clone(),
            })?;
            let answer = dispatch(&kb, &router, backend.as_ref(), &text);
            println!("{}", serde_json::to_string(&answer).expect("answer serialises"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.code, f.message);
            ExitCode::FAILURE
        }
    }
}
