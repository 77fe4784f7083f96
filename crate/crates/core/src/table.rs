//! Strict header-checked CSV reading shared by every file schema in the crate.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: column `{column}`: {reason}")]
    Parse {
        file: String,
        line: u64,
        column: String,
        reason: String,
    },
}

impl TableError {
    pub(crate) fn parse(file: &str, line: u64, column: &str, reason: impl Display) -> Self {
        TableError::Parse {
            file: file.to_string(),
            line,
            column: column.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// A fully-read CSV file whose header matched an expected column set.
pub struct Table {
    file: String,
    columns: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    /// Reads `path`, rejecting unknown columns and reporting missing ones.
    /// Columns listed in `optional` may be absent.
    pub fn read(path: &Path, required: &[&str], optional: &[&str]) -> Result<Self, TableError> {
        let file = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let io_err = |source| TableError::Io {
            path: path.to_path_buf(),
            source,
        };
        let handle = std::fs::File::open(path).map_err(io_err)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(handle);
        let header = reader
            .headers()
            .map_err(|e| TableError::parse(&file, 1, "<header>", e))?
            .clone();
        let columns: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
        for c in &columns {
            if !required.contains(&c.as_str()) && !optional.contains(&c.as_str()) {
                return Err(TableError::parse(&file, 1, c, "unknown column"));
            }
        }
        for r in required {
            if !columns.iter().any(|c| c == r) {
                return Err(TableError::parse(&file, 1, r, "missing column"));
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                TableError::parse(&file, line, "<row>", e)
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, record));
        }
        Ok(Table {
            file,
            columns,
            rows,
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, record)| Row {
            table: self,
            line: *line,
            record,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }
}

pub struct Row<'a> {
    table: &'a Table,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    pub fn line(&self) -> u64 {
        self.line
    }

    /// Raw text of a column, trimmed; `None` if the column is absent from the file.
    pub fn raw(&self, column: &str) -> Option<&str> {
        let idx = self.table.columns.iter().position(|c| c == column)?;
        self.record.get(idx).map(str::trim)
    }

    pub fn get<T>(&self, column: &str) -> Result<T, TableError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self
            .raw(column)
            .ok_or_else(|| self.error(column, "column not present"))?;
        raw.parse::<T>()
            .map_err(|e| self.error(column, format!("`{raw}`: {e}")))
    }

    /// Like [`Row::get`] but an empty cell (or absent column) yields `None`.
    pub fn get_opt<T>(&self, column: &str) -> Result<Option<T>, TableError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(column) {
            None | Some("") => Ok(None),
            Some(_) => self.get(column).map(Some),
        }
    }

    pub fn get_bool(&self, column: &str) -> Result<bool, TableError> {
        match self.raw(column) {
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(self.error(column, format!("`{other}` is not a boolean"))),
            None => Err(self.error(column, "column not present")),
        }
    }

    pub fn error(&self, column: &str, reason: impl Display) -> TableError {
        TableError::parse(&self.table.file, self.line, column, reason)
    }
}

pub(crate) fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, TableError> {
    let file = std::fs::File::create(path).map_err(|source| TableError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

pub(crate) fn write_err(path: &Path, e: csv::Error) -> TableError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    TableError::Io {
        path: path.to_path_buf(),
        source,
    }
}
