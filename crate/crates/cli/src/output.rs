//! Number formatting, atomic file writes and run metadata.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, SystemTime};

use crate::error::{CliError, CliResult};

/// Seventeen significant digits, enough for every `f64` to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Serializes rows with a header into CSV bytes.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

/// `key=value` lines accompanying an output file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetadata {
    entries: Vec<(String, String)>,
}

impl RunMetadata {
    /// Starts with the tool version, the command line and the current time.
    pub fn new(command_line: &[String]) -> Self {
        let mut m = Self::default();
        m.push("tool", concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")));
        m.push("command_line", command_line.join(" "));
        m.push("timestamp", humantime::format_rfc3339_seconds(SystemTime::now()));
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        // values are single-line by construction; newlines would break the format
        let v = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.to_string(), v));
    }

    pub fn push_elapsed(&mut self, elapsed: Duration) {
        self.push("wall_clock_seconds", format!("{:.3}", elapsed.as_secs_f64()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
