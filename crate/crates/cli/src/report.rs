use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Dot,
}

/// What a command produced, before choosing a rendering.
pub struct Report {
    pub command: String,
    pub params: Value,
    pub result: Value,
    pub witnesses: Value,
    pub text: String,
    pub dot: Option<String>,
    /// False when an experiment ran but its verdict is negative.
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, params: Value) -> Report {
        Report {
            command: command.into(),
            params,
            result: Value::Null,
            witnesses: json!([]),
            text: String::new(),
            dot: None,
            passed: true,
        }
    }

    pub fn result<T: Serialize>(mut self, r: &T) -> Self {
        self.result = serde_json::to_value(r).expect("report values serialize");
        self
    }

    pub fn witnesses<T: Serialize>(mut self, w: &T) -> Self {
        self.witnesses = serde_json::to_value(w).expect("report values serialize");
        self
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.text, "{}", s.as_ref());
    }

    pub fn render(&self, format: Format, timestamp: bool) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(self.text.clone()),
            Format::Dot => self
                .dot
                .clone()
                .ok_or_else(|| CliError::Usage(format!("{} has no dot output", self.command))),
            Format::Structured => {
                let mut doc = json!({
                    "command": self.command,
                    "params": self.params,
                    "result": self.result,
                    "witnesses": self.witnesses,
                });
                if timestamp {
                    let secs = SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map_or(0, |d| d.as_secs());
                    doc["timestamp"] = json!(secs);
                }
                let mut s = serde_json::to_string_pretty(&doc).expect("json");
                s.push('\n');
                Ok(s)
            }
        }
    }
}
