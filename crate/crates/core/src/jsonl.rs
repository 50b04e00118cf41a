//! Line-delimited JSON input with per-line error reporting.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaIssue {
    /// 1-based line number.
    pub line: usize,
    pub detail: String,
}

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {}", format_issues(.issues))]
    Schema {
        path: String,
        issues: Vec<SchemaIssue>,
    },
}

fn format_issues(issues: &[SchemaIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("line {}: {}", i.line, i.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses every non-blank line. All malformed lines are reported together.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let io_err = |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut items = Vec::new();
    let mut issues = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(&line) {
            Ok(item) => items.push(item),
            Err(e) => issues.push(SchemaIssue {
                line: idx + 1,
                detail: e.to_string(),
            }),
        }
    }
    if issues.is_empty() {
        Ok(items)
    } else {
        Err(JsonlError::Schema {
            path: path.display().to_string(),
            issues,
        })
    }
}
