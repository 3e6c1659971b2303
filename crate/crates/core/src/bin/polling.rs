use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polling_core::experiment;
use polling_core::plan::{load_plan, Action};
use polling_core::Error;

/// Classify, sweep, simulate or fluid-trace a polling system described by a
/// plan file.
#[derive(Parser, Debug)]
#[command(name = "polling", version)]
struct Args {
    /// Plan file.
    #[arg(long)]
    plan: PathBuf,
    /// Master seed; overrides the plan's `seed` section.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Matrix-multiplication budget for the s0 search.
    #[arg(long)]
    budget: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let mut plan = match load_plan(&args.plan) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    if let Some(b) = args.budget {
        match &mut plan.action {
            Action::Classify(p) => p.budget = b,
            Action::Sweep(p) => p.classify.budget = b,
            _ => eprintln!("warning: --budget ignored for action {}", plan.action.name()),
        }
    }
    match experiment::execute(&plan, &args.out) {
        Ok(files) => {
            if matches!(plan.action, Action::Classify(_)) {
                let text = std::fs::read_to_string(args.out.join("verdict.json")).unwrap_or_default();
                if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
                    println!("{}", v["text"].as_str().unwrap_or_default());
                }
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Parse { .. } | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
