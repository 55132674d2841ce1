//! Deterministic CSV and text output with atomic write-then-rename.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_csv(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a file atomically (temp file in the same directory, then rename).
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Render rows of f64 columns under a header line.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_csv(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1e-300] {
            let s = fmt_csv(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn atomic_write_creates_parents() {
        let dir = std::env::temp_dir().join("sapi_output_test");
        let _ = fs::remove_dir_all(&dir);
        let path = dir.join("nested/file.csv");
        write_atomic(&path, "a,b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}
