//! File writers shared by the commands. All numeric output uses Rust's
//! shortest round-trip float formatting so reruns are byte-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliResult;

/// `prefix` with `suffix` appended to its file name (`out` + `.json` -> `out.json`).
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::CliError::usage(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One value per line.
pub fn write_column(path: &Path, values: &[f64]) -> CliResult<()> {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Columns of possibly different lengths; short columns leave blank cells.
pub fn write_columns(path: &Path, header: &[String], columns: &[&[f64]]) -> CliResult<()> {
    let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        let line: Vec<String> = columns
            .iter()
            .map(|c| c.get(r).map(|v| format!("{v}")).unwrap_or_default())
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Row-major grid without a header.
pub fn write_grid<W: Write>(mut w: W, rows: usize, cols: usize, data: &[f64]) -> CliResult<()> {
    for r in 0..rows {
        let line: Vec<String> = data[r * cols..(r + 1) * cols]
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads and parses a one-column series file.
pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| crate::CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    ssa_core::input::parse_series(&text)
        .map_err(|e| crate::CliError::usage(format!("{}: {e}", path.display())))
}
