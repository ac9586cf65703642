//! Plain-text Q-table snapshots.
//!
//! ```text
//! # qtable actions=3
//! 1,0<TAB>0<TAB>-10
//! 1,0<TAB>1<TAB>4.5
//! ```
//!
//! One tab-separated line per state-action pair: comma-separated state
//! features, action index, value. Values use the shortest representation that parses back to
//! the same `f64`. Lines starting with `#` after the header are comments.

use std::fmt::Write;

use super::{ActionIndex, DiscreteState, QTable, RlError};

const HEADER: &str = "# qtable actions=";

pub fn export_snapshot(table: &QTable) -> String {
    let mut out = format!("{HEADER}{}\n", table.n_actions());
    for (state, row) in table.iter() {
        let features = state
            .features()
            .iter()
            .map(i32::to_string)
            .collect::<Vec<_>>()
            .join(",");
        for (a, v) in row.iter().enumerate() {
            let _ = writeln!(out, "{features}\t{a}\t{v}");
        }
    }
    out
}

pub fn import_snapshot(text: &str) -> Result<QTable, RlError> {
    let err = |line: usize, message: String| RlError::Snapshot { line, message };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let n_actions: usize = header
        .strip_prefix(HEADER)
        .and_then(|n| n.trim().parse().ok())
        .ok_or_else(|| err(1, format!("expected '{HEADER}<n>'")))?;
    let mut table = QTable::new(n_actions)?;

    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim_end();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(
                line,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let features = if fields[0].is_empty() {
            Vec::new()
        } else {
            fields[0]
                .split(',')
                .map(|f| f.parse::<i32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(line, format!("bad state '{}': {e}", fields[0])))?
        };
        let action: usize = fields[1]
            .parse()
            .map_err(|e| err(line, format!("bad action '{}': {e}", fields[1])))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|e| err(line, format!("bad value '{}': {e}", fields[2])))?;
        table
            .set(&DiscreteState(features), ActionIndex(action), value)
            .map_err(|e| err(line, e.to_string()))?;
    }
    Ok(table)
}
