//! JSON-lines persistence for rollout records.
//!
//! One record per line keeps files appendable, streamable, and diffable;
//! the writer emits keys in a fixed order so identical runs produce
//! byte-identical files. Malformed lines are reported with their
//! one-based line number.

use super::rollout::RolloutRecord;
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Writes records to `path`, one JSON object per line.
pub fn persist_rollouts(path: &Path, records: &[RolloutRecord]) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::invalid(format!("cannot serialize rollout record: {e}")))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads records from a JSON-lines file written by [`persist_rollouts`].
///
/// Blank lines are skipped; anything else that fails to parse becomes a
/// [`Error::MalformedRecord`] carrying the offending line number.
pub fn load_rollouts(path: &Path) -> Result<Vec<RolloutRecord>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RolloutRecord = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedRecord { line: i + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::env::LinearGaussian;
    use crate::sim::policy::Policy;
    use crate::sim::rollout::run_rollouts;
    use crate::sim::Environment;

    #[test]
    fn round_trip_preserves_records_exactly() {
        let env = LinearGaussian::default();
        let policy = Policy::zero(env.horizon(), env.control_dim());
        let records = run_rollouts(&env, &policy, 25, 77, false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rollouts.jsonl");
        persist_rollouts(&path, &records).unwrap();
        let back = load_rollouts(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn identical_runs_write_identical_bytes() {
        let env = LinearGaussian::default();
        let policy = Policy::zero(env.horizon(), env.control_dim());
        let records = run_rollouts(&env, &policy, 10, 3, false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        persist_rollouts(&p1, &records).unwrap();
        persist_rollouts(&p2, &records).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn empty_file_loads_as_no_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        persist_rollouts(&path, &[]).unwrap();
        assert!(load_rollouts(&path).unwrap().is_empty());
    }

    #[test]
    fn malformed_lines_are_reported_by_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = r#"{"seed":1,"total_cost":0.5,"constraint_value":-0.1,"clipped":false}"#;
        std::fs::write(&path, format!("{good}\n{good}\nnot json\n")).unwrap();
        match load_rollouts(&path) {
            Err(Error::MalformedRecord { line: 3, .. }) => {}
            other => panic!("expected a line-3 parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_optional_fields_default_to_none() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("minimal.jsonl");
        let line = r#"{"seed":9,"total_cost":1.25,"constraint_value":0.0,"clipped":true}"#;
        std::fs::write(&path, format!("{line}\n")).unwrap();
        let records = load_rollouts(&path).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].seed, 9);
        assert!(records[0].clipped);
        assert!(records[0].states.is_none());
    }
}
