//! Command-line driver: configuration, mode dispatch and rank launching.

pub mod config;
pub mod launch;
pub mod run;

use thiserror::Error;

use latticefarm::bench::BenchError;
use latticefarm::comm::CommError;
use latticefarm::montecarlo::UpdateError;

pub use config::{parse_config, resolve_config, Cli, Mode, RunConfig};
pub use launch::{launch, WorkerEnv, ENV_RANK, ENV_RENDEZVOUS, ENV_ROLE, ENV_SIZE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("communication failed ({kind}): {0}", kind = variant_name(.0))]
    Comm(#[from] CommError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("rank {rank}: {message}")]
    Rank { rank: usize, message: String },
    #[error("launch failed: {0}")]
    Launch(String),
}

impl CliError {
    pub fn validation(field: &str, message: String) -> Self {
        CliError::Validation {
            field: field.to_string(),
            message,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 2 for bad invocations, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Validation { .. } => 2,
            _ => 1,
        }
    }
}

fn variant_name<T: std::fmt::Debug>(v: &T) -> String {
    let s = format!("{v:?}");
    s.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

/// Parses, launches and reports; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(args).and_then(|cfg| launch(&cfg));
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("latticefarm: error: {e}");
            e.exit_code()
        }
    }
}
