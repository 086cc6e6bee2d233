//! Reading one numeric column out of a delimited text file.

use std::path::Path;

use evi_core::spacings::validate_and_sort;
use evi_core::OrderedTail;

use crate::error::{CliError, CliResult};

/// How many offending lines a parse report lists before summarising.
const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ColumnSelector {
    /// First column whose entry in the first data row is numeric.
    #[default]
    FirstNumeric,
    /// 1-based position.
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<usize>() {
            Ok(0) => Err("column positions start at 1".into()),
            Ok(i) => Ok(ColumnSelector::Index(i)),
            Err(_) if s.is_empty() => Err("empty column name".into()),
            Err(_) => Ok(ColumnSelector::Name(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetOptions {
    pub column: ColumnSelector,
    pub delimiter: u8,
    pub header: HeaderMode,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self { column: ColumnSelector::FirstNumeric, delimiter: b',', header: HeaderMode::Auto }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: Vec<f64>,
    /// 1-based line number of every value, for error reports.
    pub lines: Vec<u64>,
    pub column_name: Option<String>,
}

impl Dataset {
    pub fn tail(&self) -> CliResult<OrderedTail> {
        validate_and_sort(&self.values).map_err(|e| CliError::parse(e.to_string()))
    }
}

fn is_number(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

pub fn read_dataset(path: &Path, opts: &DatasetOptions) -> CliResult<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    // comments and blank lines are dropped here so reported line numbers stay those of the file
    let mut kept = String::with_capacity(text.len());
    let mut line_of = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        kept.push_str(line);
        kept.push('\n');
        line_of.push(i as u64 + 1);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(kept.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        let idx = rec.position().map_or(0, |p| p.line() as usize - 1);
        records.push((line_of.get(idx).copied().unwrap_or(0), rec));
    }
    if records.is_empty() {
        return Err(CliError::parse(format!("{}: no data rows", path.display())));
    }

    let has_header = match opts.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => {
            let first = &records[0].1;
            match records.get(1) {
                // a header is a first row that is non-numeric where the data are numeric
                Some((_, second)) => first.iter().zip(second.iter()).any(|(a, b)| !is_number(a) && is_number(b)),
                None => !first.iter().any(is_number),
            }
        }
    };
    let header = if has_header { Some(records.remove(0).1) } else { None };
    if records.is_empty() {
        return Err(CliError::parse(format!("{}: header but no data rows", path.display())));
    }

    let col = match &opts.column {
        ColumnSelector::Index(i) => i - 1,
        ColumnSelector::Name(name) => {
            let h = header
                .as_ref()
                .ok_or_else(|| CliError::parse(format!("column '{name}' requested but the file has no header")))?;
            h.iter()
                .position(|f| f == name)
                .ok_or_else(|| CliError::parse(format!("no column named '{name}' in the header")))?
        }
        ColumnSelector::FirstNumeric => {
            let (line, first) = &records[0];
            first
                .iter()
                .position(is_number)
                .ok_or_else(|| CliError::parse(format!("line {line}: no numeric column")))?
        }
    };
    let column_name = header.as_ref().and_then(|h| h.get(col)).map(str::to_string);

    let mut values = Vec::with_capacity(records.len());
    let mut lines = Vec::with_capacity(records.len());
    let mut problems = Vec::new();
    for (line, rec) in &records {
        let field = rec.get(col).unwrap_or("");
        match field.parse::<f64>() {
            Ok(v) if !v.is_finite() => problems.push(format!("line {line}: value '{field}' is not finite")),
            Ok(v) if v <= 0.0 => problems.push(format!("line {line}: value {field} is not positive")),
            Ok(v) => {
                values.push(v);
                lines.push(*line);
            }
            Err(_) if rec.get(col).is_none() => problems.push(format!("line {line}: missing column {}", col + 1)),
            Err(_) => problems.push(format!("line {line}: cannot parse '{field}' as a number")),
        }
    }
    if !problems.is_empty() {
        let extra = problems.len().saturating_sub(MAX_REPORTED);
        problems.truncate(MAX_REPORTED);
        if extra > 0 {
            problems.push(format!("... and {extra} more"));
        }
        return Err(CliError::parse(format!("{}:\n  {}", path.display(), problems.join("\n  "))));
    }
    if values.len() < 2 {
        return Err(CliError::parse(format!("{}: need at least 2 values, found {}", path.display(), values.len())));
    }
    Ok(Dataset { values, lines, column_name })
}
