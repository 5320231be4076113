//! Figure sweeps, oracle validation and spin-system calculators behind the
//! `zeno-sense` command.

use std::fmt;
use std::path::PathBuf;

pub mod config;
pub mod figures;
pub mod spins;
pub mod spotcheck;
pub mod table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] zeno_sense_core::Error),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for failed checks and I/O, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 2,
            CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}

/// Ordered `key=value` lines printed after a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(pub Vec<(String, String)>);

impl Summary {
    pub fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.push(key, table::format_value(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
