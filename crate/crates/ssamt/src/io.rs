//! CSV tables: a header row, comma separated, one series per numeric column.
//!
//! Empty cells and `NA` / `NaN` (any case) read as missing; missing values
//! are written as `NA`. Numbers are written in the shortest form that parses
//! back to the same `f64`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ssamt_core::{MultiSeries, TimeSeries};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: empty data (no rows after the header)")]
    EmptyData { path: PathBuf },
    #[error("{path}: missing header row")]
    NoHeader { path: PathBuf },
    #[error("{path}: duplicate column name {name:?}")]
    DuplicateColumn { path: PathBuf, name: String },
    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: row {row}, column {column:?}: non-finite value {value:?}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: no column named {name:?}")]
    NoSuchColumn { path: PathBuf, name: String },
    #[error("{path}: no numeric columns")]
    NoNumericColumns { path: PathBuf },
    #[error("{0}")]
    Core(#[from] ssamt_core::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

/// Which columns are not numeric series.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// The first column is an index or time stamp, kept as text.
    pub index_column: bool,
    /// Further text columns (for example a group label), by header name.
    pub label_columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(TimeSeries),
    Text { name: String, values: Vec<String> },
}

impl Column {
    pub fn name(&self) -> &str {
        match self {
            Column::Numeric(s) => s.name(),
            Column::Text { name, .. } => name,
        }
    }
}

/// A whole file, columns in header order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: usize,
}

impl Table {
    pub fn numeric(&self) -> impl Iterator<Item = &TimeSeries> {
        self.columns.iter().filter_map(|c| match c {
            Column::Numeric(s) => Some(s),
            Column::Text { .. } => None,
        })
    }

    pub fn multi_series(&self) -> ssamt_core::Result<MultiSeries> {
        MultiSeries::new(self.numeric().cloned().collect())
    }

    pub fn text(&self, name: &str) -> Option<&[String]> {
        self.columns.iter().find_map(|c| match c {
            Column::Text { name: n, values } if n == name => Some(values.as_slice()),
            _ => None,
        })
    }

    /// Swaps in new numeric columns, matched by name; text columns stay.
    pub fn with_numeric(&self, replacement: &MultiSeries) -> Table {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(s) => Column::Numeric(replacement.get(s.name()).cloned().unwrap_or_else(|| s.clone())),
                other => other.clone(),
            })
            .collect();
        Table {
            columns,
            rows: self.rows,
        }
    }
}

pub fn is_missing_marker(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_table(path: &Path, options: &CsvOptions) -> Result<Table> {
    parse_table(open(path)?, path, options)
}

/// Parses CSV text from any reader; `path` is only used in messages.
pub fn parse_table(reader: impl Read, path: &Path, options: &CsvOptions) -> Result<Table> {
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(IoError::NoHeader { path: path.to_path_buf() });
    }
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(IoError::DuplicateColumn {
                path: path.to_path_buf(),
                name: h.clone(),
            });
        }
    }
    for label in &options.label_columns {
        if !headers.contains(label) {
            return Err(IoError::NoSuchColumn {
                path: path.to_path_buf(),
                name: label.clone(),
            });
        }
    }
    let is_text: Vec<bool> = headers
        .iter()
        .enumerate()
        .map(|(j, h)| (j == 0 && options.index_column) || options.label_columns.contains(h))
        .collect();

    let mut text: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    let mut nums: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len()];
    let mut record = csv::StringRecord::new();
    let mut rows = 0;
    while rdr.read_record(&mut record).map_err(csv_err)? {
        rows += 1;
        // header is line 1
        let row = rows + 1;
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if is_text[j] {
                text[j].push(cell.to_string());
                continue;
            }
            if is_missing_marker(cell) {
                nums[j].push(None);
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| IoError::Parse {
                path: path.to_path_buf(),
                row,
                column: headers[j].clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(IoError::NonFinite {
                    path: path.to_path_buf(),
                    row,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                });
            }
            nums[j].push(Some(value));
        }
    }
    if rows == 0 {
        return Err(IoError::EmptyData { path: path.to_path_buf() });
    }
    let mut columns = Vec::with_capacity(headers.len());
    for (j, name) in headers.into_iter().enumerate() {
        if is_text[j] {
            columns.push(Column::Text {
                name,
                values: std::mem::take(&mut text[j]),
            });
        } else {
            columns.push(Column::Numeric(TimeSeries::from_options(name, &nums[j])?));
        }
    }
    Ok(Table { columns, rows })
}

/// Numeric columns of a file as one [`MultiSeries`].
pub fn read_csv(path: &Path, options: &CsvOptions) -> Result<MultiSeries> {
    let table = read_table(path, options)?;
    if table.numeric().next().is_none() {
        return Err(IoError::NoNumericColumns { path: path.to_path_buf() });
    }
    Ok(table.multi_series()?)
}

pub fn format_value(v: f64) -> String {
    // Display prints the shortest digits that round-trip.
    format!("{v}")
}

pub fn write_table_to(table: &Table, out: impl Write, path: &Path) -> Result<()> {
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(table.columns.iter().map(Column::name)).map_err(csv_err)?;
    let rows = table
        .columns
        .iter()
        .map(|c| match c {
            Column::Numeric(s) => s.len(),
            Column::Text { values, .. } => values.len(),
        })
        .max()
        .unwrap_or(0)
        .max(table.rows);
    let mut record = Vec::with_capacity(table.columns.len());
    for i in 0..rows {
        record.clear();
        for c in &table.columns {
            record.push(match c {
                Column::Numeric(s) => match s.get(i) {
                    Some(v) => format_value(v),
                    None => "NA".to_string(),
                },
                Column::Text { values, .. } => values.get(i).cloned().unwrap_or_default(),
            });
        }
        wtr.write_record(&record).map_err(csv_err)?;
    }
    wtr.flush().map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_table(table: &Table, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    write_table_to(table, std::io::BufWriter::new(file), path)
}

/// Writes every series as a column; shorter series are padded with `NA`.
pub fn write_csv(series: &MultiSeries, path: &Path) -> Result<()> {
    let table = Table {
        columns: series.series().iter().cloned().map(Column::Numeric).collect(),
        rows: 0,
    };
    write_table(&table, path)
}
