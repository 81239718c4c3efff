use crate::error::{Error, Result};

/// An i.i.d. sample of `n` points in `R^dim`, stored row major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    dim: usize,
}

impl Dataset {
    /// Build a dataset from a flat row-major buffer.
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "flat buffer of length {} is not a positive multiple of dim {}",
                values.len(),
                dim
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        let n = values.len() / dim;
        Ok(Dataset { values, n, dim })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::from_flat(rows.into_iter().flatten().collect(), dim)
    }

    /// Univariate convenience constructor.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.dim).copied()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Componentwise `x[i] <= y` for lower-left orthant indicators.
    pub fn row_leq(&self, i: usize, point: &[f64]) -> bool {
        self.row(i).iter().zip(point).all(|(a, b)| a <= b)
    }

    pub(crate) fn column_mean(&self, j: usize) -> f64 {
        self.column(j).sum::<f64>() / self.n as f64
    }

    /// Unbiased sample variance of column `j`.
    pub(crate) fn column_variance(&self, j: usize) -> f64 {
        let m = self.column_mean(j);
        self.column(j).map(|v| (v - m) * (v - m)).sum::<f64>() / (self.n as f64 - 1.0)
    }
}
