//! Run reports. Everything except the `timing` object is a function of the scenario bytes.

use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: String,
    pub status: Status,
    pub max_residual: Option<f64>,
    pub tol: Option<f64>,
    pub details: Value,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn error(name: &str, kind: &str, message: String, seconds: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            kind: kind.into(),
            status: Status::Error,
            max_residual: None,
            tol: None,
            details: json!({ "error": message }),
            seconds,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "type": self.kind,
            "status": self.status.as_str(),
            "max_residual": self.max_residual,
            "tol": self.tol,
            "details": self.details,
        })
    }
}

pub struct Report {
    pub scenario: String,
    pub sha256: String,
    pub threads: usize,
    pub checks: Vec<CheckOutcome>,
    pub total_seconds: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn to_json(&self) -> Value {
        let timing: Map<String, Value> = self.checks.iter().map(|c| (c.name.clone(), json!(c.seconds))).collect();
        json!({
            "tool": "cocycle",
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": self.scenario,
            "scenario_sha256": self.sha256,
            "status": if self.passed() { "pass" } else { "fail" },
            "checks": self.checks.iter().map(CheckOutcome::to_json).collect::<Vec<_>>(),
            "timing": { "threads": self.threads, "total_seconds": self.total_seconds, "checks": timing },
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let residual = c.max_residual.map(|r| format!(" max_residual={r:.3e}")).unwrap_or_default();
            let tol = c.tol.map(|t| format!(" tol={t:.1e}")).unwrap_or_default();
            out.push_str(&format!("{:5} {} ({}){residual}{tol}\n", c.status.as_str(), c.name, c.kind));
            if let Some(msg) = c.details.get("error").and_then(Value::as_str) {
                out.push_str(&format!("      {msg}\n"));
            }
        }
        out
    }
}
