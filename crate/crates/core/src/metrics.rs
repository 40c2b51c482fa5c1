//! External clustering-quality measures: variation of information and the
//! adjusted Rand index.
//!
//! Partitions are canonicalized on construction (ids renumbered by first
//! appearance), so both measures give bit-identical results under any
//! relabeling of their inputs.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    ids: Vec<usize>,
    blocks: usize,
}

impl Partition {
    pub fn new(assignment: &[usize]) -> Result<Self> {
        Self::from_labels(assignment)
    }

    pub fn from_labels<T: Hash + Eq>(labels: &[T]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut seen: HashMap<&T, usize> = HashMap::new();
        let ids = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Ok(Self {
            ids,
            blocks: seen.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }
}

struct Contingency {
    cells: Vec<Vec<u64>>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    n: u64,
}

fn contingency(a: &Partition, b: &Partition) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut cells = vec![vec![0u64; b.blocks]; a.blocks];
    for (&i, &j) in a.ids.iter().zip(&b.ids) {
        cells[i][j] += 1;
    }
    let rows = cells.iter().map(|r| r.iter().sum()).collect();
    let cols = (0..b.blocks)
        .map(|j| cells.iter().map(|r| r[j]).sum())
        .collect();
    Ok(Contingency {
        cells,
        rows,
        cols,
        n: a.len() as u64,
    })
}

fn xlnx(count: u64) -> f64 {
    let c = count as f64;
    c * c.ln()
}

/// Entropy of a block of `total` items split into the given counts.
/// A pure block contributes exactly zero.
fn block_entropy(total: u64, counts: impl Iterator<Item = u64>) -> f64 {
    let mut nonzero = 0;
    let mut acc = 0.0;
    for c in counts.filter(|&c| c > 0) {
        nonzero += 1;
        acc += xlnx(c);
    }
    if nonzero <= 1 {
        return 0.0;
    }
    (total as f64).ln() - acc / total as f64
}

/// Variation of information `H(a) + H(b) - 2 I(a; b)` in nats, computed as
/// `H(a | b) + H(b | a)`.
pub fn vi(a: &Partition, b: &Partition) -> Result<f64> {
    let t = contingency(a, b)?;
    let n = t.n as f64;
    let a_given_b: f64 = (0..t.cols.len())
        .map(|j| t.cols[j] as f64 / n * block_entropy(t.cols[j], t.cells.iter().map(|r| r[j])))
        .sum();
    let b_given_a: f64 = t
        .cells
        .iter()
        .zip(&t.rows)
        .map(|(row, &total)| total as f64 / n * block_entropy(total, row.iter().copied()))
        .sum();
    Ok(a_given_b + b_given_a)
}

fn pairs(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Adjusted Rand index from the contingency table. Returns 1 when both
/// partitions are trivial in the same way (the index is 0/0 there).
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    let t = contingency(a, b)?;
    let index: u128 = t.cells.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_a: u128 = t.rows.iter().map(|&c| pairs(c)).sum();
    let sum_b: u128 = t.cols.iter().map(|&c| pairs(c)).sum();
    let total = pairs(t.n);
    if total == 0 {
        return Ok(1.0);
    }
    let expected = sum_a as f64 * sum_b as f64 / total as f64;
    let max = 0.5 * (sum_a + sum_b) as f64;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / (max - expected))
}
