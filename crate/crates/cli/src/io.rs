//! Matrix and vector file ingestion.
//!
//! CSV matrices have one row per line with comma-separated decimal
//! literals; JSON matrices are objects `{"rows": m, "cols": n, "data":
//! [...]}` with row-major data. Vectors are a single CSV line, a single
//! CSV column, or a JSON array.

use serde::Deserialize;
use sparkcert::{DenseMatrix, LinalgError};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// Pick a format from an explicit flag or the file extension; CSV wins
    /// when neither decides.
    pub fn detect(flag: Option<MatrixFormat>, path: &Path) -> MatrixFormat {
        flag.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        })
    }
}

#[derive(Debug)]
pub enum IoError {
    Read {
        path: String,
        source: std::io::Error,
    },
    /// 1-based line, 1-based field.
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    Dimension {
        path: String,
        message: String,
    },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Read { path, source } => write!(f, "{path}: {source}"),
            IoError::Parse {
                path,
                line,
                column,
                message,
            } => write!(f, "{path}:{line}:{column}: {message}"),
            IoError::Dimension { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for IoError {}

fn dimension_error(path: &Path, e: LinalgError) -> IoError {
    IoError::Dimension {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn parse_matrix(path: &Path, format: MatrixFormat) -> Result<DenseMatrix, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        MatrixFormat::Csv => parse_csv_matrix(path, &text),
        MatrixFormat::Json => parse_json_matrix(path, &text),
    }
}

fn parse_csv_matrix(path: &Path, text: &str) -> Result<DenseMatrix, IoError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (field_no, field) in line.split(',').enumerate() {
            let value = field.trim().parse::<f64>().map_err(|_| IoError::Parse {
                path: path.display().to_string(),
                line: line_no + 1,
                column: field_no + 1,
                message: format!("not a decimal literal: {:?}", field.trim()),
            })?;
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(IoError::Parse {
                    path: path.display().to_string(),
                    line: line_no + 1,
                    column: row.len(),
                    message: format!(
                        "ragged row: expected {} fields, got {}",
                        first.len(),
                        row.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IoError::Dimension {
            path: path.display().to_string(),
            message: "empty matrix file".to_string(),
        });
    }
    let cols = rows[0].len();
    DenseMatrix::new(rows.len(), cols, rows.concat()).map_err(|e| dimension_error(path, e))
}

#[derive(Deserialize)]
struct JsonMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn parse_json_matrix(path: &Path, text: &str) -> Result<DenseMatrix, IoError> {
    let parsed: JsonMatrix = serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    DenseMatrix::new(parsed.rows, parsed.cols, parsed.data).map_err(|e| dimension_error(path, e))
}

/// Parse a vector: JSON array, one CSV line, or one CSV column.
pub fn parse_vector(path: &Path, format: MatrixFormat) -> Result<Vec<f64>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        MatrixFormat::Json => {
            let values: Vec<f64> = serde_json::from_str(&text).map_err(|e| IoError::Parse {
                path: path.display().to_string(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            Ok(values)
        }
        MatrixFormat::Csv => {
            let m = parse_csv_matrix(path, &text)?;
            if m.rows() == 1 || m.cols() == 1 {
                Ok(m.data().to_vec())
            } else {
                Err(IoError::Dimension {
                    path: path.display().to_string(),
                    message: format!("expected a vector, got {}x{}", m.rows(), m.cols()),
                })
            }
        }
    }
}
