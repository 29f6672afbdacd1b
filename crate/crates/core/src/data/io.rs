//! CSV tables in, JSON results out.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::RawTable;
use crate::error::{Error, Result};

/// Reads a UTF-8 CSV with a header row whose first column is the response.
pub fn load_csv(path: impl AsRef<Path>) -> Result<RawTable> {
    let path = path.as_ref();
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Parses CSV text. Line numbers in errors are 1-based file lines, so the
/// first data row is line 2.
pub fn parse_csv(text: &str) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| Error::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let names: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if names.len() < 2 {
        return Err(Error::Csv {
            line: 1,
            message: "header must name the response and at least one feature".into(),
        });
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        for cell in record.iter() {
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                line,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    message: format!("non-finite cell {cell:?}"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    RawTable::new(rows, names.len() - 1, values)?.with_names(names)
}

pub fn table_to_csv(table: &RawTable) -> String {
    let rows = (0..table.rows()).map(|l| table.row(l).to_vec());
    csv_string(table.names(), rows)
}

pub fn write_table_csv(path: impl AsRef<Path>, table: &RawTable) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, table_to_csv(table)).map_err(|e| Error::io(path, e))
}

/// Writes numeric rows under a header. Floats use Rust's shortest
/// round-trip formatting.
pub fn write_csv<S: AsRef<str>>(
    path: impl AsRef<Path>,
    header: &[S],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, csv_string(header, rows)).map_err(|e| Error::io(path, e))
}

fn csv_string<S: AsRef<str>>(header: &[S], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// The JSON results schema shared by every command.
///
/// Absent statistics (for example standard errors of a single fit) are
/// written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub weights: Vec<f64>,
    pub standard_errors: Option<Vec<Option<f64>>>,
    pub t_stats: Option<Vec<Option<f64>>>,
    pub cost: Option<f64>,
    pub r_squared: Option<f64>,
    pub config_echo: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ResultsDocument {
    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn save_results_json(path: impl AsRef<Path>, doc: &ResultsDocument) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, doc.to_json_string()?).map_err(|e| Error::io(path, e))
}

pub fn load_results_json(path: impl AsRef<Path>) -> Result<ResultsDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_table() {
        let t = parse_csv("y,x1\n1,2\n3,4\n").unwrap();
        assert_eq!((t.rows(), t.features()), (2, 1));
        assert_eq!(t.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.names(), &["y".to_string(), "x1".to_string()]);
    }

    #[test]
    fn bad_cell_reports_line() {
        let err = parse_csv("y,x1\nabc,2\n3,4\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 2, .. }), "{err}");
        let err = parse_csv("y,x1\n1,2\n3,4,5\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_csv("/nonexistent/t.csv"), Err(Error::Io { .. })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = RawTable::new(2, 1, vec![0.1, 1.0 / 3.0, -2.5e-300, 123456.789]).unwrap();
        assert_eq!(parse_csv(&table_to_csv(&t)).unwrap(), t);
    }
}
