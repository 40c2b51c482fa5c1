use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x d` row-major matrix of finite reals with optional class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    n: usize,
    d: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        values: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "dataset dimension must be >= 1".into(),
            ));
        }
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !values.len().is_multiple_of(d) {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: d,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let n = values.len() / d;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: n,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            d,
            values,
            labels,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        Self::new(name, d, rows.concat(), None)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Labels mapped to dense ids in order of first appearance.
    pub fn label_ids(&self) -> Option<Vec<usize>> {
        let labels = self.labels.as_ref()?;
        let mut ids = HashMap::new();
        Some(
            labels
                .iter()
                .map(|l| {
                    let next = ids.len();
                    *ids.entry(l.as_str()).or_insert(next)
                })
                .collect(),
        )
    }

    pub fn distinct_labels(&self) -> Option<usize> {
        self.label_ids()
            .map(|ids| ids.iter().max().map_or(0, |m| m + 1))
    }

    /// Rescales every column to mean 0 and population standard deviation 1.
    /// Constant columns are only centered.
    pub fn standardized(&self) -> Self {
        let mut values = self.values.clone();
        for j in 0..self.d {
            let col = self.column(j);
            let mean = col.iter().sum::<f64>() / self.n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.n as f64;
            let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..self.n {
                let v = &mut values[i * self.d + j];
                *v = (*v - mean) / scale;
            }
        }
        Self {
            values,
            ..self.clone()
        }
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            name: self.name.clone(),
            n: indices.len(),
            d: self.d,
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
        }
    }
}
