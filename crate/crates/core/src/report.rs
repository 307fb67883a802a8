//! Pass/fail check reports shared by the table, iteration, and certificate
//! verifiers. A failed entry never aborts a run; it is recorded and surfaced.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new() -> Self {
        Report { entries: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.entries.push(CheckEntry {
            label: label.into(),
            pass,
            detail: detail.into(),
        });
    }

    /// True iff every entry passed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "passed": self.passed(),
            "entries": self.entries,
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{} {}{}",
                if e.pass { "PASS" } else { "FAIL" },
                e.label,
                if e.detail.is_empty() {
                    String::new()
                } else {
                    format!(" — {}", e.detail)
                }
            )?;
        }
        Ok(())
    }
}
