//! Zero/nonzero masks of matrices.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boolean structure of a `rows x cols` matrix. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparsityPattern {
    rows: usize,
    cols: usize,
    nonzeros: BTreeSet<(usize, usize)>,
}

impl SparsityPattern {
    /// Builds a pattern, rejecting out-of-bounds coordinates. Duplicates collapse.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut nonzeros = BTreeSet::new();
        for (r, c) in entries {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} pattern"
                )));
            }
            nonzeros.insert((r, c));
        }
        Ok(Self {
            rows,
            cols,
            nonzeros,
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            nonzeros: BTreeSet::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            nonzeros: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            nonzeros: (0..rows)
                .flat_map(|r| (0..cols).map(move |c| (r, c)))
                .collect(),
        }
    }

    /// Pattern of a dense matrix given as row-major rows of booleans.
    pub fn from_rows(rows: &[&[bool]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let entries = rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &nz)| nz)
                .map(move |(j, _)| (i, j))
        });
        Self::new(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.nonzeros.len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.nonzeros.contains(&(row, col))
    }

    /// Nonzeros in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nonzeros.iter().copied()
    }

    pub fn insert(&mut self, row: usize, col: usize) -> Result<bool> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::Dimension(format!(
                "entry ({row}, {col}) outside a {}x{} pattern",
                self.rows, self.cols
            )));
        }
        Ok(self.nonzeros.insert((row, col)))
    }

    pub fn remove(&mut self, row: usize, col: usize) -> bool {
        self.nonzeros.remove(&(row, col))
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            nonzeros: self.nonzeros.iter().map(|&(r, c)| (c, r)).collect(),
        }
    }

    /// Column indices of the nonzeros in `row`.
    pub fn row_support(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.nonzeros
            .range((row, 0)..(row + 1, 0))
            .map(|&(_, c)| c)
    }

    /// For each column, the rows holding a nonzero (ascending).
    pub fn column_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.cols];
        for &(r, c) in &self.nonzeros {
            lists[c].push(r);
        }
        lists
    }

    pub fn is_zero_row(&self, row: usize) -> bool {
        self.row_support(row).next().is_none()
    }

    /// Stacks `self` on top of `other` (same column count).
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let mut nonzeros = self.nonzeros.clone();
        nonzeros.extend(other.nonzeros.iter().map(|&(r, c)| (r + self.rows, c)));
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            nonzeros,
        })
    }

    /// Stacks a list of patterns sharing a column count. An empty list gives `0 x cols`.
    pub fn vstack_all<'a>(cols: usize, parts: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        parts
            .into_iter()
            .try_fold(Self::empty(0, cols), |acc, p| acc.vstack(p))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "union of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut nonzeros = self.nonzeros.clone();
        nonzeros.extend(other.nonzeros.iter().copied());
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            nonzeros,
        })
    }

    /// Pattern of `Mᵀ M`: (p, q) is set when some row holds both p and q.
    pub fn gram(&self) -> Self {
        let mut nonzeros = BTreeSet::new();
        for r in 0..self.rows {
            let support: Vec<usize> = self.row_support(r).collect();
            for &p in &support {
                for &q in &support {
                    nonzeros.insert((p, q));
                }
            }
        }
        Self {
            rows: self.cols,
            cols: self.cols,
            nonzeros,
        }
    }

    /// Restriction to the given rows and columns, re-indexed in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.cols];
        for (k, &c) in cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let mut nonzeros = BTreeSet::new();
        for (k, &r) in rows.iter().enumerate() {
            for c in self.row_support(r) {
                if col_pos[c] != usize::MAX {
                    nonzeros.insert((k, col_pos[c]));
                }
            }
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            nonzeros,
        }
    }

    /// True when every nonzero of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.nonzeros.is_subset(&other.nonzeros)
    }
}

impl fmt::Display for SparsityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.contains(r, c) { 'x' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
