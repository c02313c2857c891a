//! CSV and JSON artifact writers. Floats are written with 17 significant
//! digits so re-parsing is lossless; every artifact is hashed for the
//! manifest.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use sha2::{Digest, Sha256};

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a CSV with a header row; returns the file's SHA-256 hex digest.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut text = String::new();
    writeln!(text, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        writeln!(text, "{}", line.join(","))?;
    }
    write_bytes(dir, name, text.as_bytes())
}

/// Write pre-serialized JSON; returns the SHA-256 hex digest.
pub fn write_json(dir: &Path, name: &str, json: &str) -> Result<String> {
    write_bytes(dir, name, json.as_bytes())
}

fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> Result<String> {
    std::fs::write(dir.join(name), bytes)?;
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}")?;
    }
    Ok(hex)
}
