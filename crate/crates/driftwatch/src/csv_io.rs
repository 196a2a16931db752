//! CSV ingestion. One format, deliberately: comma-separated, '.'-decimal,
//! LF or CRLF, optional single header row detected by its refusal to parse
//! as numbers.

use std::path::Path;

use driftwatch_core::DataSet;

use crate::{HarnessError, Result};

/// Loads a numeric CSV file into a [`DataSet`].
///
/// The first row is treated as a header when any of its fields fails to
/// parse as a number; every later row must parse completely. Error positions
/// are 1-based over data rows (the header, when present, is not counted).
pub fn load_dataset(path: &Path) -> Result<DataSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::io(path, io),
            other => parse_err(path, 0, 0, format!("{other:?}")),
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dims = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, rows.len() + 1, 0, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, (usize, String)> = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| (col + 1, format!("cannot parse {field:?} as a number")))
            })
            .collect();
        match parsed {
            Ok(values) => {
                if rows.is_empty() {
                    dims = values.len();
                } else if values.len() != dims {
                    return Err(parse_err(
                        path,
                        rows.len() + 1,
                        0,
                        format!("expected {dims} columns, found {}", values.len()),
                    ));
                }
                rows.push(values);
            }
            // Only the very first row may fail to parse; that makes it the
            // header. Anywhere else it is malformed data.
            Err(_) if idx == 0 => continue,
            Err((col, detail)) => {
                return Err(parse_err(path, rows.len() + 1, col, detail));
            }
        }
    }

    if rows.is_empty() {
        return Err(HarnessError::EmptyFile { path: path.into() });
    }
    let values: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DataSet::from_vec(rows.len(), dims, values)?)
}

fn parse_err(path: &Path, row: usize, col: usize, detail: String) -> HarnessError {
    HarnessError::Parse {
        path: path.into(),
        row,
        col,
        detail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_numeric_csv() {
        let f = write("0,1\n2,3\n4,5\n");
        let ds = load_dataset(f.path()).unwrap();
        assert_eq!((ds.rows(), ds.dims()), (3, 2));
        assert_eq!(ds.row(2), &[4.0, 5.0]);
    }

    #[test]
    fn header_row_is_skipped() {
        let f = write("x,y\r\n1,2\r\n3,4\r\n");
        let ds = load_dataset(f.path()).unwrap();
        assert_eq!((ds.rows(), ds.dims()), (2, 2));
        assert_eq!(ds.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn empty_file_is_rejected() {
        let f = write("");
        assert!(matches!(
            load_dataset(f.path()),
            Err(HarnessError::EmptyFile { .. })
        ));
        let only_header = write("a,b\n");
        assert!(matches!(
            load_dataset(only_header.path()),
            Err(HarnessError::EmptyFile { .. })
        ));
    }

    #[test]
    fn malformed_data_row_reports_its_position() {
        let f = write("x,y\na,b\n");
        match load_dataset(f.path()) {
            Err(HarnessError::Parse { row, col, .. }) => {
                assert_eq!((row, col), (1, 1));
            }
            other => panic!("expected a parse failure, got {other:?}"),
        }
        let g = write("1,2\n3,oops\n");
        match load_dataset(g.path()) {
            Err(HarnessError::Parse { row, col, .. }) => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected a parse failure, got {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let f = write("1,2\n3\n");
        assert!(matches!(
            load_dataset(f.path()),
            Err(HarnessError::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_dataset(Path::new("/nonexistent/never.csv")),
            Err(HarnessError::Io { .. })
        ));
    }
}
