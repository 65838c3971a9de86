use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// Machine-readable result of one subcommand, written to stdout as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandReport {
    pub schema: u32,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Human-readable rows mirrored to stderr.
    #[serde(skip)]
    pub table: Vec<(String, String)>,
}

impl CommandReport {
    pub fn new(command: &str) -> Self {
        CommandReport {
            schema: SCHEMA,
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: Value::Null,
            pass: None,
            seed: None,
            table: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn row(&mut self, key: impl Into<String>, value: impl ToString) {
        self.table.push((key.into(), value.to_string()));
    }

    pub fn emit(&self) {
        let stderr = std::io::stderr();
        let mut err = stderr.lock();
        let width = self.table.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let _ = writeln!(err, "== {} ==", self.command);
        for (key, value) in &self.table {
            let _ = writeln!(err, "  {key:<width$}  {value}");
        }
        if let Some(pass) = self.pass {
            let _ = writeln!(err, "  {:<width$}  {}", "result", if pass { "PASS" } else { "FAIL" });
        }
        let json = serde_json::to_string(self).expect("serializable report");
        println!("{json}");
    }
}
