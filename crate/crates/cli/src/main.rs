//! `gp4nldr`: run evolutions, chat about results and manage the background
//! store from the command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid arguments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gp4nldr_core::data::{load_csv, CsvOptions, LabelColumn};
use gp4nldr_core::explain::rag::{read_documents, VectorStore};
use gp4nldr_core::explain::{ChatSession, ExplainConfig, Explainer, PromptTemplate};
use gp4nldr_core::llm::{ChatProvider, HttpProvider, MockProvider, ProviderConfig};
use gp4nldr_core::{examples, BloatControl, ChatState, FitnessId, RunConfig, SessionArchive};

#[derive(Parser)]
#[command(name = "gp4nldr", version, about = "GP-based nonlinear dimensionality reduction with LLM explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve an embedding for a CSV dataset and write a result archive.
    Run(RunArgs),
    /// Ask questions about a result archive.
    Chat(ChatArgs),
    /// Manage the background document store.
    Store {
        #[command(subcommand)]
        command: StoreCommand,
    },
    /// Regenerate the preloaded example archives.
    Examples {
        #[command(subcommand)]
        command: ExamplesCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// CSV file with one row per instance.
    #[arg(long)]
    dataset: PathBuf,
    /// Label column: zero-based index, header name, or `last`.
    #[arg(long)]
    label_col: String,
    /// The CSV has no header row; features are named f0, f1, ...
    #[arg(long)]
    no_header: bool,
    /// Dataset name used in results (defaults to the file stem).
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "gpmal")]
    fitness: FitnessId,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    #[arg(long, default_value_t = 100)]
    gens: usize,
    /// none, lexicographic, double or tarpeian.
    #[arg(long, default_value = "lexicographic")]
    bloat: BloatControl,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the result archive.
    #[arg(long)]
    out: PathBuf,
    /// Print a machine-readable summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ChatArgs {
    /// Result or session archive to discuss.
    #[arg(long)]
    result: PathBuf,
    /// Follow-up question; without it only the initial summary is requested.
    #[arg(long)]
    question: Option<String>,
    /// Use the offline echo provider instead of the HTTP API.
    #[arg(long)]
    mock: bool,
    /// Print the prompt of the last exchange instead of the answer.
    #[arg(long)]
    show_prompt: bool,
    /// Background store file (defaults to the bundled documents).
    #[arg(long)]
    store: Option<PathBuf>,
    /// Retrieval settings (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    word_limit: Option<usize>,
    /// Model identifier (defaults to GP4NLDR_LLM_MODEL or the built-in default).
    #[arg(long)]
    model: Option<String>,
    /// Write the archive with the updated chat history here.
    #[arg(long)]
    save: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum StoreCommand {
    /// Chunk and vectorize every .md/.txt file in a directory.
    Build {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum ExamplesCommand {
    /// Run the example configurations and write their archives.
    Build {
        #[arg(long)]
        out: PathBuf,
        /// Only this example id.
        #[arg(long)]
        only: Option<String>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Chat(args) => cmd_chat(args),
        Command::Store {
            command: StoreCommand::Build { docs, out, config, json },
        } => cmd_store_build(&docs, &out, config.as_deref(), json),
        Command::Examples {
            command: ExamplesCommand::Build { out, only },
        } => cmd_examples_build(&out, only.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let config = RunConfig {
        population_size: args.pop,
        generations: args.gens,
        final_dimensions: args.dims,
        fitness: args.fitness,
        bloat: args.bloat,
        seed: args.seed,
        ..RunConfig::default()
    };
    config.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let name = args.name.clone().unwrap_or_else(|| {
        args.dataset
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let mut options = CsvOptions::new(name, LabelColumn::parse(&args.label_col));
    if args.no_header {
        options = options.headerless();
    }
    let file = fs::File::open(&args.dataset)
        .map_err(|e| Failure::runtime(format!("{}: {e}", args.dataset.display())))?;
    let dataset = load_csv(file, &options).map_err(Failure::runtime)?;
    let result = gp4nldr_core::run(&dataset, &config).map_err(Failure::runtime)?;
    let archive = SessionArchive::new(result, None);
    fs::write(&args.out, archive.to_json())
        .map_err(|e| Failure::runtime(format!("{}: {e}", args.out.display())))?;
    let r = &archive.result;
    if args.json {
        let summary = json!({
            "out": args.out,
            "dataset": r.dataset.name,
            "expressions": r.expressions,
            "best_fitness": r.best_fitness(),
            "accuracy_original": r.accuracy_original,
            "accuracy_embedding": r.accuracy_embedding,
        });
        println!("{summary}");
    } else {
        println!("dataset: {} ({} x {})", r.dataset.name, r.dataset.n_instances, r.dataset.feature_names.len());
        for (i, e) in r.expressions.iter().enumerate() {
            println!("dimension {}: {e}", i + 1);
        }
        println!("best fitness: {:.6}", r.best_fitness());
        println!(
            "accuracy: original {:.4}, embedding {:.4}",
            r.accuracy_original, r.accuracy_embedding
        );
        println!("wrote {}", args.out.display());
    }
    Ok(())
}

fn read_archive(path: &Path) -> Result<SessionArchive, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    SessionArchive::from_json(&text).map_err(Failure::runtime)
}

fn cmd_chat(args: ChatArgs) -> Result<(), Failure> {
    if args.word_limit == Some(0) {
        return Err(Failure::usage("--word-limit must be at least 1"));
    }
    let explain_cfg = match &args.config {
        Some(p) => ExplainConfig::load(p).map_err(Failure::runtime)?,
        None => ExplainConfig::default(),
    };
    let mut archive = read_archive(&args.result)?;
    let store = match &args.store {
        Some(p) => VectorStore::load(p).map_err(Failure::runtime)?,
        None => VectorStore::bundled(),
    };
    let explainer = Explainer::new(PromptTemplate::default(), store, explain_cfg.top_k);

    let mut provider_cfg = ProviderConfig::from_env();
    if let Some(m) = &args.model {
        provider_cfg.model_id = m.clone();
    }
    let provider: Box<dyn ChatProvider> = if args.mock {
        Box::new(MockProvider::echo())
    } else {
        provider_cfg.validate().map_err(Failure::usage)?;
        Box::new(HttpProvider::new(provider_cfg.clone()))
    };

    let run_ref = args.result.display().to_string();
    let mut session = match archive.chat.take() {
        Some(chat) => chat.into_session(run_ref),
        None => {
            let mut s = ChatSession::new(run_ref, provider_cfg.model_id.clone());
            s.keywords = explain_cfg.keywords.clone();
            s.word_limit = explain_cfg.word_limit;
            s
        }
    };
    if let Some(w) = args.word_limit {
        session.word_limit = w;
    }
    if let Some(m) = &args.model {
        session.model_id = m.clone();
    }

    let mut turns = Vec::new();
    if !session.is_started() {
        turns.push(
            explainer
                .begin(&mut session, &archive.result, provider.as_ref())
                .map_err(Failure::runtime)?,
        );
    }
    if let Some(q) = &args.question {
        turns.push(
            explainer
                .ask(&mut session, q, &archive.result, provider.as_ref())
                .map_err(Failure::runtime)?,
        );
    }
    if let Some(path) = &args.save {
        archive.chat = Some(ChatState::from_session(&session));
        fs::write(path, archive.to_json())
            .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    }

    let last = turns.last();
    if args.json {
        let out = json!({
            "turns": turns.iter().map(|t| json!({
                "question": t.question,
                "answer": t.answer,
                "matched_keywords": t.matched_keywords,
                "retrieved": t.retrieved,
                "prompt": if args.show_prompt { Some(&t.prompt) } else { None },
            })).collect::<Vec<_>>(),
            "messages": session.messages.len(),
        });
        println!("{out}");
    } else if args.show_prompt {
        if let Some(t) = last {
            print!("{}", t.prompt);
        }
    } else {
        for t in &turns {
            println!("Human: {}", t.question);
            println!("AI: {}", t.answer);
        }
    }
    Ok(())
}

fn cmd_store_build(docs: &Path, out: &Path, config: Option<&Path>, json: bool) -> Result<(), Failure> {
    let cfg = match config {
        Some(p) => ExplainConfig::load(p).map_err(Failure::runtime)?,
        None => ExplainConfig::default(),
    };
    if cfg.chunk_chars <= cfg.overlap_chars {
        return Err(Failure::usage("chunk_chars must exceed overlap_chars"));
    }
    let documents = read_documents(docs)
        .map_err(|e| Failure::runtime(format!("{}: {e}", docs.display())))?;
    if documents.is_empty() {
        eprintln!("warning: no .md or .txt documents in {}; writing an empty store", docs.display());
    }
    let store =
        VectorStore::build(&documents, cfg.chunk_chars, cfg.overlap_chars).map_err(Failure::runtime)?;
    store.save(out).map_err(Failure::runtime)?;
    if json {
        println!(
            "{}",
            json!({"documents": documents.len(), "chunks": store.len(), "out": out})
        );
    } else {
        println!("{} documents, {} chunks -> {}", documents.len(), store.len(), out.display());
    }
    Ok(())
}

fn cmd_examples_build(out: &Path, only: Option<&str>) -> Result<(), Failure> {
    let ids: Vec<&str> = match only {
        Some(id) if examples::find(id).is_some() => vec![id],
        Some(id) => return Err(Failure::usage(format!("unknown example `{id}`"))),
        None => examples::ids(),
    };
    fs::create_dir_all(out).map_err(Failure::runtime)?;
    for id in ids {
        let archive = examples::generate(id)
            .expect("known example")
            .map_err(Failure::runtime)?;
        let path = out.join(format!("{id}.json"));
        fs::write(&path, archive.to_json()).map_err(Failure::runtime)?;
        println!(
            "{id}: accuracy {:.4} -> {:.4}, wrote {}",
            archive.result.accuracy_original,
            archive.result.accuracy_embedding,
            path.display()
        );
    }
    Ok(())
}
