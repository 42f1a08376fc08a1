use std::path::PathBuf;

use sramlab_core::netlist::NetlistError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", netlist_message(path, source))]
    Netlist { path: PathBuf, source: NetlistError },
    #[error("{phase}: {message}")]
    Simulation { phase: String, message: String },
    #[error("writing output: {0}")]
    Output(String),
}

fn netlist_message(path: &std::path::Path, e: &NetlistError) -> String {
    match e.line {
        Some(line) => format!("{}:{line}: {}", path.display(), e.kind),
        None => format!("{}: {}", path.display(), e.kind),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn sim<E: std::fmt::Display>(phase: impl Into<String>) -> impl FnOnce(E) -> CliError {
        let phase = phase.into();
        move |e| CliError::Simulation {
            phase,
            message: e.to_string(),
        }
    }
}
