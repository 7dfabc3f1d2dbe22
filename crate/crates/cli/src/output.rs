//! JSON and CSV emission. JSON objects gain a `meta` block unless disabled.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub struct Sink {
    pub meta: bool,
    pub command: &'static str,
}

impl Sink {
    pub fn json<T: Serialize>(&self, payload: &T) -> Result<(), CliError> {
        let mut value =
            serde_json::to_value(payload).map_err(|e| CliError::Compute(e.to_string()))?;
        if self.meta {
            if let Value::Object(map) = &mut value {
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                map.insert(
                    "meta".into(),
                    json!({"tool": "unpol", "version": env!("CARGO_PKG_VERSION"), "command": self.command, "timestamp": now}),
                );
            }
        }
        let text =
            serde_json::to_string_pretty(&value).map_err(|e| CliError::Compute(e.to_string()))?;
        write_stdout(&format!("{text}\n"))
    }
}

pub fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Compute(format!("cannot write output: {e}")))
}

/// Writes CSV rows to `path`, or to stdout when `path` is `-`.
pub fn csv<R: Serialize>(path: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Compute(format!("cannot write CSV: {e}"));
    let mut buf = csv::Writer::from_writer(Vec::new());
    for row in rows {
        buf.serialize(row).map_err(fail)?;
    }
    let bytes = buf
        .into_inner()
        .map_err(|e| CliError::Compute(e.to_string()))?;
    if path == "-" {
        write_stdout(&String::from_utf8_lossy(&bytes))
    } else {
        std::fs::write(path, bytes)
            .map_err(|e| CliError::Compute(format!("cannot write {path}: {e}")))
    }
}
