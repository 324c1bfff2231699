//! JSON-lines measurement logs and snapshot export.

use std::io::{BufRead, Write};

use rbinit_core::filter::Snapshot;

use crate::realization::validate_events;
use crate::synth::LogEvent;
use crate::SimError;

/// Parses a measurement log, one JSON object per line. Blank lines are
/// skipped; errors report the 1-based line number.
pub fn read_log<R: BufRead>(reader: R) -> Result<Vec<LogEvent>, SimError> {
    let mut events = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| SimError::Io(format!("line {line_no}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: LogEvent = serde_json::from_str(&line).map_err(|e| SimError::Parse {
            line: line_no,
            message: format!("not a dead-reckoning or range record: {e}"),
        })?;
        events.push(ev);
        lines.push(line_no);
    }
    validate_events(&events).map_err(|e| match e {
        SimError::Parse { line, message } => SimError::Parse { line: lines[line - 1], message },
        other => other,
    })?;
    Ok(events)
}

pub fn write_log<W: Write>(mut w: W, events: &[LogEvent]) -> Result<(), SimError> {
    for ev in events {
        let line = serde_json::to_string(ev).map_err(|e| SimError::Io(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| SimError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn write_snapshots<W: Write>(mut w: W, snapshots: &[Snapshot]) -> Result<(), SimError> {
    for s in snapshots {
        let line = serde_json::to_string(s).map_err(|e| SimError::Io(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| SimError::Io(e.to_string()))?;
    }
    Ok(())
}
