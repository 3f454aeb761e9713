//! Dense square matrices, row-major, sized for desk-scale networks.
//!
//! Everything in this crate works on small n-by-n matrices (agent counts and
//! short delay windows), so storage is a flat `Vec<f64>` with no sparsity.
//! Matrices serialize as row-major JSON arrays of arrays.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A square matrix of `f64` entries in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SquareMat {
    n: usize,
    data: Vec<f64>,
}

impl SquareMat {
    /// n-by-n zero matrix.
    pub fn zeros(n: usize) -> Self {
        SquareMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// n-by-n identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from nested rows, checking squareness.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    row: i,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMat { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    /// Overwrite row `i` from a slice of length n.
    pub fn set_row(&mut self, i: usize, row: &[f64]) {
        assert_eq!(row.len(), self.n);
        self.row_mut(i).copy_from_slice(row);
    }

    /// Left-to-right sum of row `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &SquareMat) -> Result<SquareMat> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let n = self.n;
        let mut out = SquareMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Entrywise `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &SquareMat) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in &mut self.data {
            *a *= c;
        }
    }

    /// True if any entry is negative.
    pub fn has_negative_entry(&self) -> Option<(usize, usize, f64)> {
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if v < 0.0 {
                    return Some((i, j, v));
                }
            }
        }
        None
    }

    /// Rows in nested-vec form (used for serialization and reports).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Maximum absolute difference against another matrix of the same size.
    pub fn max_abs_diff(&self, other: &SquareMat) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMat {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SquareMat::from_rows(rows)
    }
}

impl From<SquareMat> for Vec<Vec<f64>> {
    fn from(m: SquareMat) -> Self {
        m.to_rows()
    }
}
