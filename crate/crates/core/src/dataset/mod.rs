//! Survey tables: schema, validity cleaning, encoding, artificial missingness,
//! splitting and a seeded synthetic generator.

pub(crate) mod encode;
pub mod io;
mod missing;
mod schema;
mod split;
mod synthetic;
mod validate;

pub use encode::{decode, encode, EncodedMatrix};
pub use missing::{inject_missing, InjectionReport, Mechanism, MissingnessPlan};
pub use schema::{names, Schema, VariableKind, VariableSpec};
pub use split::{split, Partition};
pub use synthetic::{generate_synthetic, PlantedModel, SyntheticParams};
pub use validate::{clean, validate_record, Violation};

use crate::error::{Error, Result};

/// A survey table. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Vec<Option<i64>>>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Vec<Option<i64>>>) -> Result<Self> {
        let arity = schema.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != arity) {
            return Err(Error::Arity {
                expected: arity,
                got: bad.len(),
            });
        }
        Ok(Self { schema, rows })
    }

    pub fn from_complete(schema: Schema, rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(
            schema,
            rows.into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_missing(&self, row: usize, var: usize) -> bool {
        self.rows[row][var].is_none()
    }

    pub fn missing_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.iter().filter(|c| c.is_none()).count())
            .sum()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(Option::is_some))
    }

    /// Observed values of one variable.
    pub fn column(&self, var: usize) -> Vec<Option<i64>> {
        self.rows.iter().map(|r| r[var]).collect()
    }

    /// Column as reals; panics on a missing cell, so only call on complete data.
    pub fn column_f64(&self, var: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r[var].expect("complete column") as f64)
            .collect()
    }

    /// Rows with no missing cells.
    pub fn complete_rows(&self) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| r.iter().all(Option::is_some))
                .cloned()
                .collect(),
        }
    }

    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Copy with every cell of the named variables blanked.
    pub fn without_variables(&self, names: &[String]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|n| self.schema.require(n))
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        for row in &mut out.rows {
            for &v in &idx {
                row[v] = None;
            }
        }
        Ok(out)
    }
}
