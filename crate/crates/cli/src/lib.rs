//! Experiment drivers behind the `fastdvm` binary.

pub mod bench;
pub mod config;
pub mod error;
pub mod farey;
pub mod run;
pub mod table1;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::{Duration, Instant};

pub use error::CliError;

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct GlobalOptions {
    /// Output prefix; files are written as `<prefix>_<kind>.csv`.
    pub out: Option<String>,
    pub deterministic: bool,
    pub budget: Option<Duration>,
    pub threads: Option<usize>,
}

impl GlobalOptions {
    pub fn threads(&self, configured: usize, deterministic: bool) -> usize {
        if self.deterministic || deterministic {
            1
        } else {
            self.threads.unwrap_or(configured).max(1)
        }
    }

    pub(crate) fn prefix(&self, configured: Option<&str>, fallback: &str) -> String {
        self.out
            .clone()
            .or_else(|| configured.map(str::to_owned))
            .unwrap_or_else(|| fallback.to_owned())
    }
}

pub(crate) fn create_output(prefix: &str, kind: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = PathBuf::from(format!("{prefix}_{kind}.csv"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

/// Wall-clock budget for a whole command.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Deadline {
    start: Instant,
    budget: Option<Duration>,
}

impl Deadline {
    pub(crate) fn new(budget: Option<Duration>) -> Self {
        Deadline {
            start: Instant::now(),
            budget,
        }
    }

    pub(crate) fn remaining(&self) -> Option<Duration> {
        self.budget.map(|b| b.saturating_sub(self.start.elapsed()))
    }

    pub(crate) fn check(&self, what: &str) -> Result<(), CliError> {
        match self.budget {
            Some(b) if self.start.elapsed() > b => Err(CliError::Budget(format!(
                "{what}: {:.1} s elapsed, budget {:.1} s",
                self.start.elapsed().as_secs_f64(),
                b.as_secs_f64()
            ))),
            _ => Ok(()),
        }
    }
}
