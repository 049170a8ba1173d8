//! `ooro` — occlusion order recovery pipeline.
//!
//! Subcommands mirror the workflow: `ingest` normalizes annotations into a
//! scenes file, `predict` produces per-scene occlusion matrices (heuristics
//! or a vision LLM with a record/replay cache), `eval` scores predictions
//! against ground truth, `graph` exports DOT order graphs, and `parse` is a
//! debug entry for single responses.
//!
//! Exit codes: 0 ok, 2 usage or input error, 3 replay misconfiguration
//! (more than 10% cache misses in `--replay-only`).

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ooro", version, about = "Recover and evaluate pairwise occlusion order")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load COCOA or InstaOrder+COCO annotations into a scenes JSONL file
    Ingest(commands::ingest::IngestArgs),
    /// Produce a predictions JSONL file for every scene
    Predict(commands::predict::PredictArgs),
    /// Score predictions against ground truth; write JSON and CSV reports
    Eval(commands::eval::EvalArgs),
    /// Export occlusion order graphs as DOT
    Graph(commands::graph::GraphArgs),
    /// Parse a raw response against a category CSV and print the result
    Parse(commands::parse::ParseArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Graph(args) => commands::graph::run(args),
        Command::Parse(args) => commands::parse::run(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
