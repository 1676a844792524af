//! Convergence-history CSV in the `its,g_trun,g_loc` layout.

use std::io::Write;
use std::path::Path;

use crate::{BenchError, Result};

pub const CSV_HEADER: &str = "its,g_trun,g_loc";

fn cell(trace: Option<&[(usize, f64)]>, row: usize) -> String {
    match trace.and_then(|t| t.get(row)) {
        // 17 significant digits round-trip every double.
        Some(&(_, e)) => format!("{e:.16e}"),
        None => String::new(),
    }
}

/// `g_trun` is the MASTR trace and `g_loc` the RMTR trace; a missing or
/// shorter trace leaves its cells empty.
pub fn trace_csv(mastr: Option<&[(usize, f64)]>, rmtr: Option<&[(usize, f64)]>) -> String {
    let rows = mastr.map_or(0, <[_]>::len).max(rmtr.map_or(0, <[_]>::len));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in 0..rows {
        out.push_str(&format!("{},{},{}\n", row + 1, cell(mastr, row), cell(rmtr, row)));
    }
    out
}

pub fn write_trace_csv(path: &Path, mastr: Option<&[(usize, f64)]>, rmtr: Option<&[(usize, f64)]>) -> Result<()> {
    let io = |source| BenchError::Io { path: path.display().to_string(), source };
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(trace_csv(mastr, rmtr).as_bytes()).map_err(io)
}
