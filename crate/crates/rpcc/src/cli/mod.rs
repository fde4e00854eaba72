//! Config-driven command front end wiring the library into reproducible
//! experiments.
//!
//! Every command reads one JSON config (see [`config::ExperimentConfig`]),
//! writes deterministic CSV/JSON artifacts under
//! `<out>/<command>/<tag>/`, and records a manifest with the config hash.
//! Artifacts are staged in a scratch directory and moved into place only on
//! success, so a failed run never leaves partial results. Reruns with the
//! same config and seeds produce bit-identical artifacts.
//!
//! Exit codes: 0 success, 2 config error, 3 numeric failure
//! (non-convergence or violated model assumptions), 4 I/O error.
//!
//! The `--seed` flag overrides every seed in the config (dataset,
//! projection, and K-means alike), which is the quick way to rerun an
//! experiment on fresh randomness.

pub mod config;

mod commands;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Error;
use config::{ExperimentConfig, Needs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// The available experiment commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Generate a dataset and write it as CSV.
    Gen,
    /// Build a fusion-weight graph and check the weight condition.
    Weights,
    /// Sample a projection matrix and embed the data.
    Project,
    /// Solve one instance at a fixed gamma.
    Solve,
    /// Sweep a gamma grid and score the path.
    Path,
    /// Compute every recovery-bound quantity as JSON.
    Bounds,
    /// Estimate squared-norm preservation rates over many projections.
    VerifyJl,
    /// K-means (optionally on embedded data).
    Kmeans,
    /// Projected clustering vs projected K-means on shared projections.
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Weights => "weights",
            Command::Project => "project",
            Command::Solve => "solve",
            Command::Path => "path",
            Command::Bounds => "bounds",
            Command::VerifyJl => "verify-jl",
            Command::Kmeans => "kmeans",
            Command::Compare => "compare",
        }
    }

    fn needs(&self) -> Needs {
        match self {
            Command::Gen => Needs {
                dataset: true,
                ..Needs::default()
            },
            Command::Weights => Needs {
                dataset: true,
                weights: true,
                ..Needs::default()
            },
            Command::Project => Needs {
                dataset: true,
                projection: true,
                ..Needs::default()
            },
            Command::Solve => Needs {
                dataset: true,
                weights: true,
                gamma: true,
                ..Needs::default()
            },
            Command::Path => Needs {
                dataset: true,
                weights: true,
                grid: true,
                ..Needs::default()
            },
            Command::Bounds => Needs {
                dataset: true,
                weights: true,
                labels: true,
                ..Needs::default()
            },
            Command::VerifyJl => Needs {
                dataset: true,
                projection: true,
                ..Needs::default()
            },
            Command::Kmeans => Needs {
                dataset: true,
                kmeans: true,
                ..Needs::default()
            },
            Command::Compare => Needs {
                dataset: true,
                weights: true,
                grid: true,
                compare: true,
                labels: true,
                ..Needs::default()
            },
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One CLI invocation: the command plus its common flags.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config_path: PathBuf,
    /// `--out`: output root, overriding the config's `output`.
    pub out: Option<PathBuf>,
    /// `--seed`: override every configured seed.
    pub seed: Option<u64>,
    /// `--tag`: output subdirectory name; defaults to a config-hash tag.
    pub tag: Option<String>,
    /// `--dry-run`: validate the config and exit.
    pub dry_run: bool,
}

/// In-memory artifacts; written to disk only when the whole command
/// succeeded.
#[derive(Debug, Default)]
pub struct ArtifactSet {
    files: Vec<(String, String)>,
}

impl ArtifactSet {
    pub fn push(&mut self, name: impl Into<String>, content: impl Into<String>) {
        self.files.push((name.into(), content.into()));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    seed_override: Option<u64>,
    artifacts: Vec<&'a str>,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Validation(_) | Error::Parse { .. } | Error::Shape(_) => {
            EXIT_CONFIG
        }
        Error::WeightAssumption(_) | Error::DuplicateCentroids(_) | Error::NonConvergence(_) => {
            EXIT_NUMERIC
        }
        Error::Io(_) | Error::Json(_) => EXIT_IO,
    }
}

/// Run one invocation end to end. Returns the process exit code; failures
/// are reported on stderr.
pub fn run(inv: &Invocation) -> i32 {
    let raw = match fs::read_to_string(&inv.config_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!(
                "error: cannot read config {}: {e}",
                inv.config_path.display()
            );
            return EXIT_CONFIG;
        }
    };
    let cfg: ExperimentConfig = match serde_json::from_str(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config {} is invalid: {e}", inv.config_path.display());
            return EXIT_CONFIG;
        }
    };
    let violations = cfg.validate(&inv.command.needs());
    if !violations.is_empty() {
        eprintln!(
            "error: config {} fails validation for `{}`:",
            inv.config_path.display(),
            inv.command
        );
        for v in &violations {
            eprintln!("  - {v}");
        }
        return EXIT_CONFIG;
    }
    if inv.dry_run {
        println!("config ok for `{}` (dry run, nothing executed)", inv.command);
        return EXIT_OK;
    }

    let result = match inv.command {
        Command::Gen => commands::gen(&cfg, inv.seed),
        Command::Weights => commands::weights(&cfg, inv.seed),
        Command::Project => commands::project(&cfg, inv.seed),
        Command::Solve => commands::solve(&cfg, inv.seed),
        Command::Path => commands::path(&cfg, inv.seed),
        Command::Bounds => commands::bounds(&cfg, inv.seed),
        Command::VerifyJl => commands::verify_jl(&cfg, inv.seed),
        Command::Kmeans => commands::kmeans(&cfg, inv.seed),
        Command::Compare => commands::compare(&cfg, inv.seed),
    };
    let artifacts = match result {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };

    let out_root = inv
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let hash = config_hash(&raw, inv.seed);
    let tag = inv
        .tag
        .clone()
        .unwrap_or_else(|| format!("cfg-{hash:016x}"));
    match persist(&out_root, inv.command.name(), &tag, &artifacts, &raw, inv.seed) {
        Ok(dir) => {
            println!("{} -> {}", inv.command, dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: failed to write artifacts: {e}");
            EXIT_IO
        }
    }
}

fn config_hash(raw: &str, seed: Option<u64>) -> u64 {
    let mut h = DefaultHasher::new();
    raw.hash(&mut h);
    seed.hash(&mut h);
    h.finish()
}

fn persist(
    out_root: &Path,
    command: &str,
    tag: &str,
    artifacts: &ArtifactSet,
    raw_config: &str,
    seed: Option<u64>,
) -> std::io::Result<PathBuf> {
    let parent = out_root.join(command);
    let final_dir = parent.join(tag);
    let staging = parent.join(format!(".{tag}.partial"));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    for (name, content) in &artifacts.files {
        fs::write(staging.join(name), content)?;
    }
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: format!("{:016x}", config_hash(raw_config, seed)),
        seed_override: seed,
        artifacts: artifacts.names(),
    };
    fs::write(
        staging.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    if final_dir.exists() {
        fs::remove_dir_all(&final_dir)?;
    }
    fs::rename(&staging, &final_dir)?;
    Ok(final_dir)
}
