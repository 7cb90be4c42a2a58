//! The `belief` command line: scenario traces, postulate suites and witness
//! searches, with deterministic text or JSON output.

pub mod check;
pub mod revise;
pub mod scenario;
pub mod search;

use std::path::PathBuf;

use belief_core::logic::Vocabulary;
use belief_core::postulates::CheckConfig;
use clap::{Parser, Subcommand};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_SIGNATURE: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "belief", version, about = "Belief revision traces, postulate checks and searches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Bounds {
    /// Comma-separated atom names.
    #[arg(long, default_value = "p,q")]
    pub vocab: String,
    /// Largest finite rank when enumerating OCFs.
    #[arg(long, default_value_t = 2)]
    pub max_rank: u32,
    /// Longest observation sequence for sequence postulates.
    #[arg(long, default_value_t = 3)]
    pub seq_bound: usize,
}

impl Bounds {
    pub fn config(&self) -> Result<CheckConfig, CliError> {
        let vocab = Vocabulary::parse_csv(&self.vocab)
            .map_err(|e| CliError::Parse(format!("--vocab: {e}")))?;
        Ok(self.config_for(vocab))
    }

    pub fn config_for(&self, vocab: Vocabulary) -> CheckConfig {
        let mut cfg = CheckConfig::new(vocab);
        cfg.max_rank = self.max_rank;
        cfg.sequence_length_bound = self.seq_bound;
        cfg
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario's operator over its observations and print the trace.
    Revise {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a postulate suite and compare it with the suite's expected signature.
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        operator: Option<String>,
        /// Take the vocabulary and initial state from a scenario file.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
    },
    /// Search for witnesses.
    Search {
        #[arg(long)]
        target: String,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
    },
}

/// What a command prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    pub fn ok(stdout: String) -> Self {
        Output {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    pub fn error(e: &CliError) -> Self {
        Output {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        }
    }
}

pub(crate) fn to_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Output {
    let result = match cli.command {
        Command::Revise { scenario, json } => revise::cmd_revise(&scenario, json),
        Command::Check {
            suite,
            operator,
            scenario,
            bounds,
            json,
        } => check::cmd_check(&suite, operator.as_deref(), scenario.as_deref(), &bounds, json),
        Command::Search {
            target,
            bounds,
            json,
        } => search::cmd_search(&target, &bounds, json),
    };
    result.unwrap_or_else(|e| Output::error(&e))
}
