use std::path::Path;

use crate::CliError;

pub fn parse_delimiter(s: &str) -> Result<u8, CliError> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(CliError::Parse(format!(
            "delimiter must be a single ASCII character, got '{s}'"
        ))),
    }
}

/// Reads a numeric table. A first row that does not parse as numbers is
/// treated as a header and skipped.
pub fn read_table(path: &Path, delimiter: u8) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::read(path, e))?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::read(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => {}
            Err(e) => {
                return Err(CliError::Parse(format!("{}: line {}: {e}", path.display(), line + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Parse(format!("{}: no numeric rows", path.display())));
    }
    Ok(rows)
}

/// Reads one non-negative integer label per line, skipping a header line.
pub fn read_labels(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let mut labels = Vec::new();
    for (line, raw) in text.lines().enumerate() {
        let field = raw.split([',', '\t', ';']).next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse() {
            Ok(l) => labels.push(l),
            Err(_) if line == 0 => {}
            Err(e) => {
                return Err(CliError::Parse(format!("{}: line {}: {e}", path.display(), line + 1)));
            }
        }
    }
    Ok(labels)
}

pub fn transpose(rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, CliError> {
    let width = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(CliError::Parse(format!(
            "row {} has {} fields, expected {width}",
            i + 1,
            rows[i].len()
        )));
    }
    Ok((0..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect())
}
