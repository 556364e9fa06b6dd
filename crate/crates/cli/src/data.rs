//! Header-first CSV tables with columns selected by name.

use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Table {
    path: PathBuf,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    /// 1-based file line of each row.
    lines: Vec<u64>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(path, &bytes)
    }

    /// Parses CSV bytes; `path` is only used in messages.
    pub fn parse(path: &Path, bytes: &[u8]) -> Result<Self, CliError> {
        let csv_error = |e: csv::Error| CliError::Csv {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
                _ => e.to_string(),
            },
        };
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(bytes);
        let headers: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        if headers.iter().all(String::is_empty) {
            return Err(CliError::Csv { path: path.to_path_buf(), line: 1, message: "missing header row".into() });
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            lines.push(record.position().map_or(0, |p| p.line()));
            rows.push(record.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(CliError::Csv { path: path.to_path_buf(), line: 2, message: "no data rows".into() });
        }
        Ok(Table { path: path.to_path_buf(), headers, rows, lines })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn index(&self, name: &str) -> Result<usize, CliError> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| CliError::MissingColumn {
            path: self.path.clone(),
            column: name.to_string(),
            available: self.headers.join(", "),
        })
    }

    pub fn text(&self, name: &str) -> Result<Vec<&str>, CliError> {
        let j = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    pub fn numeric(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let j = self.index(name)?;
        self.rows
            .iter()
            .zip(&self.lines)
            .map(|(r, &line)| {
                r[j].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Parse {
                    path: self.path.clone(),
                    line,
                    column: name.to_string(),
                    value: r[j].clone(),
                })
            })
            .collect()
    }

    /// Maps arbitrary subject labels to 1-based ids in order of first appearance.
    pub fn subject_ids(&self, name: &str) -> Result<(Vec<usize>, Vec<String>), CliError> {
        let mut names: Vec<String> = Vec::new();
        let ids = self
            .text(name)?
            .into_iter()
            .map(|v| match names.iter().position(|n| n == v) {
                Some(k) => k + 1,
                None => {
                    names.push(v.to_string());
                    names.len()
                }
            })
            .collect();
        Ok((ids, names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(src: &str) -> Result<Table, CliError> {
        Table::parse(Path::new("t.csv"), src.as_bytes())
    }

    #[test]
    fn reads_columns_by_name() {
        let t = table("x,y\n1,2\n3.5, 4e-1\n").unwrap();
        assert_eq!(t.numeric("y").unwrap(), vec![2.0, 0.4]);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn parse_error_reports_line_and_column() {
        let err = table("x,y\n1,2\n3,abc\n").unwrap().numeric("y").unwrap_err();
        assert!(matches!(&err, CliError::Parse { line: 3, column, value, .. } if column == "y" && value == "abc"));
    }

    #[test]
    fn ragged_row_reports_line() {
        match table("x,y\n1,2\n3\n") {
            Err(CliError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_column_is_named() {
        let msg = table("x,y\n1,2\n").unwrap().numeric("z").unwrap_err().to_string();
        assert!(msg.contains("'z'") && msg.contains("x, y"), "{msg}");
    }

    #[test]
    fn subjects_follow_first_appearance() {
        let t = table("s\nb\na\nb\nc\n").unwrap();
        let (ids, names) = t.subject_ids("s").unwrap();
        assert_eq!(ids, vec![1, 2, 1, 3]);
        assert_eq!(names, vec!["b", "a", "c"]);
    }
}
