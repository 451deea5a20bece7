//! `persist`: run persistence experiments from TOML configs and write CSV artifacts.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 hypothesis violation,
//! 4 extinction or an estimate that cannot be formed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use persistence_core::Error;

use crate::output::{write_artifacts, write_manifest, RunEntry, RunManifest};

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Hypothesis(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Hypothesis(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Hypothesis(m) | Failure::Runtime(m) => m,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config error",
            Failure::Hypothesis(_) => "hypothesis violated",
            Failure::Runtime(_) => "runtime failure",
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.label(), self.message())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            Error::Domain(m) | Error::Degenerate(m) => Failure::Hypothesis(m),
            Error::Estimation(m) => Failure::Runtime(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "persist", version, about = "Persistence probabilities of heavy-tailed sample averages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// r*, the exponent, the relaxation curve and the projection bound.
    Exponent(Common),
    /// Splitting estimates on a horizon grid and the quadratic fit.
    Estimate(Common),
    /// Plateau-and-jump skeleton.
    Path(Common),
    /// Construction checks.
    Bench(Common),
    /// Seeded step batch.
    Sample(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Config file; repeat to run a campaign with one shared manifest.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Exponent(c) => ("exponent", c),
            Command::Estimate(c) => ("estimate", c),
            Command::Path(c) => ("path", c),
            Command::Bench(c) => ("bench", c),
            Command::Sample(c) => ("sample", c),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    if let Some(w) = common.workers {
        if w == 0 {
            eprintln!("config error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("runtime failure: {e}");
            return ExitCode::from(4);
        }
    }
    let workers = rayon::current_num_threads();
    let start = Instant::now();
    let campaign = common.config.len() > 1;
    let mut runs = Vec::new();
    let mut exit = 0u8;
    let mut manifest_dir = common.out.clone();

    for (idx, path) in common.config.iter().enumerate() {
        let loaded = match config::load(path) {
            Ok(l) => l,
            Err(f) => {
                eprintln!("{}: {}", f.label(), f.message());
                exit = exit.max(f.code());
                runs.push(entry(name, path, String::new(), 0, Some(&f), Vec::new()));
                continue;
            }
        };
        let cfg = &loaded.config;
        let seed = common.seed.unwrap_or(cfg.master_seed);
        let Some(dir) = common.out.clone().or_else(|| cfg.output_dir.clone()) else {
            let f = Failure::Config("no output directory: pass --out or set output_dir".into());
            eprintln!("{}: {}", f.label(), f.message());
            exit = exit.max(f.code());
            runs.push(entry(name, path, loaded.digest, seed, Some(&f), Vec::new()));
            continue;
        };
        manifest_dir.get_or_insert_with(|| dir.clone());
        let prefix = if campaign { format!("{idx:02}-{}", loaded.stem) } else { String::new() };

        let result = match name {
            "exponent" => commands::exponent(cfg),
            "estimate" => commands::estimate(cfg, seed),
            "path" => commands::path(cfg),
            "bench" => commands::bench(cfg, seed),
            _ => commands::sample(cfg, seed),
        };
        let (outcome, failure) = match result {
            Ok(mut o) => {
                let f = o.failure.take();
                (o, f)
            }
            Err(f) => (commands::Outcome::default(), Some(f)),
        };
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
        let mut failure = failure;
        let outputs = match write_artifacts(manifest_dir.as_ref().unwrap_or(&dir), &prefix, &outcome.artifacts) {
            Ok(o) => o,
            Err(f) => {
                failure.get_or_insert(f);
                Vec::new()
            }
        };
        if let Some(f) = &failure {
            eprintln!("{}: {}", f.label(), f.message());
            exit = exit.max(f.code());
        }
        runs.push(entry(name, path, loaded.digest, seed, failure.as_ref(), outputs));
    }

    let manifest = RunManifest {
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        workers,
        runs,
    };
    if let Some(dir) = manifest_dir {
        if let Err(f) = write_manifest(&dir, &manifest) {
            eprintln!("{}: {}", f.label(), f.message());
            exit = exit.max(f.code());
        }
    }
    ExitCode::from(exit)
}

fn entry(
    command: &str,
    path: &std::path::Path,
    config_digest: String,
    seed: u64,
    failure: Option<&Failure>,
    outputs: Vec<output::OutputEntry>,
) -> RunEntry {
    RunEntry {
        command: command.into(),
        config: path.display().to_string(),
        config_digest,
        seed,
        status: failure.map_or("ok", |f| f.label()).into(),
        exit_code: failure.map_or(0, |f| f.code() as i32),
        message: failure.map_or(String::new(), |f| f.message().to_string()),
        outputs,
    }
}
