//! Named feature matrices and their CSV store (`session_id,<names>`).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<T>>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(names: Vec<String>) -> Self {
        FeatureMatrix {
            names,
            ids: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, id: impl Into<String>, row: Vec<T>) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                got: row.len(),
            });
        }
        self.ids.push(id.into());
        self.rows.push(row);
        Ok(())
    }

    pub fn row(&self, id: &str) -> Option<&[T]> {
        self.ids.iter().position(|i| i == id).map(|p| self.rows[p].as_slice())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::InvalidArgument(format!("column {bad} out of range")));
        }
        Ok(FeatureMatrix {
            names: columns.iter().map(|&c| self.names[c].clone()).collect(),
            ids: self.ids.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("session_id");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.rows) {
            out.push_str(id);
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty feature file"))?;
        let mut cols = header.split(',');
        if cols.next() != Some("session_id") {
            return Err(Error::parse(origin, 1, "first column must be session_id"));
        }
        let mut m = FeatureMatrix::new(cols.map(str::to_string).collect());
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let id = fields.next().unwrap_or_default();
            let row = fields
                .map(|f| {
                    f.parse::<T>()
                        .map_err(|_| Error::parse(origin, i + 1, format!("bad number {f:?}")))
                })
                .collect::<Result<Vec<T>>>()?;
            if row.len() != m.dim() {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("expected {} values, found {}", m.dim(), row.len()),
                ));
            }
            m.ids.push(id.to_string());
            m.rows.push(row);
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }
}
