//! Run manifest and summary records.

use std::path::PathBuf;

use serde::Serialize;

/// Assertions of one named group, e.g. all Hardy instances.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Suite {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl Suite {
    pub fn new(name: &str) -> Self {
        Suite { name: name.to_string(), checked: 0, failures: Vec::new() }
    }

    /// Counts one assertion, recording `message` when it fails.
    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(message());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteSummary {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
}

impl From<&Suite> for SuiteSummary {
    fn from(s: &Suite) -> Self {
        SuiteSummary { name: s.name.clone(), passed: s.passed(), checked: s.checked, failed: s.failures.len() }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub verb: String,
    /// Hex SHA-256 of the canonical config text (saved next to the manifest).
    pub config_digest: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    pub seed: Option<u64>,
    pub strict: bool,
    pub passed: bool,
    pub suites: Vec<SuiteSummary>,
    pub outputs: Vec<PathBuf>,
}
