//! JSON report schema shared by the `kitaoka` binary and its consumers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub trace_bound: i64,
    pub node_limit: u64,
    pub max_squares: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Top-level report printed by `--json` on success.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    /// Arguments of the invocation, without the program name.
    pub command: Vec<String>,
    pub field_id: Option<String>,
    pub result: Value,
    pub timing: Timing,
    pub budgets: BudgetReport,
}
