//! Minimal CSV writing for experiment outputs.
//!
//! Cells are numbers and bare identifiers — never text needing quoting —
//! so rows are plain comma joins. Floats use Rust's shortest round-trip
//! formatting: parsing the printed text recovers the exact bit pattern,
//! which is what makes "recompute the summary from the CSV" checks exact.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Shortest round-trip decimal form of `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Formats an optional value, leaving the cell empty when absent.
pub fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a header row plus data rows to `path`, `\n`-terminated.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}
