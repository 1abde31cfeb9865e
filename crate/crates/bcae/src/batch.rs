//! Column-batched data, stored row-major.
//!
//! A `Batch` holds `dim` rows by `len` columns; each column is one sample.
//! Row-major storage keeps the inner loops of the dense-layer kernels on
//! contiguous slices.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    dim: usize,
    len: usize,
    data: Vec<f64>,
}

impl Batch {
    pub fn zeros(dim: usize, len: usize) -> Self {
        assert!(dim >= 1 && len >= 1, "batch dimensions must be >= 1");
        Batch {
            dim,
            len,
            data: vec![0.0; dim * len],
        }
    }

    /// Builds a batch from row-major data, checking shape and finiteness.
    pub fn from_vec(dim: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if dim < 1 || len < 1 {
            return Err(Error::Input(format!(
                "batch dimensions must be >= 1, got {dim} x {len}"
            )));
        }
        if data.len() != dim * len {
            return Err(Error::Input(format!(
                "batch data length {} does not match {dim} x {len}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Input("batch contains non-finite entries".into()));
        }
        Ok(Batch { dim, len, data })
    }

    pub fn from_fn(dim: usize, len: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut b = Batch::zeros(dim, len);
        for r in 0..dim {
            for c in 0..len {
                b.data[r * len + c] = f(r, c);
            }
        }
        b
    }

    /// Single-column batch from a slice.
    pub fn column_vector(values: &[f64]) -> Self {
        assert!(!values.is_empty());
        Batch {
            dim: values.len(),
            len: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of columns (samples).
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // by construction dim, len >= 1
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.len + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.len + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.len..(row + 1) * self.len]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.len..(row + 1) * self.len]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, factor: f64) -> Batch {
        Batch {
            dim: self.dim,
            len: self.len,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Element-wise sum; shapes must match.
    pub fn add(&self, other: &Batch) -> Batch {
        assert_eq!(self.dim, other.dim, "batch dim mismatch");
        assert_eq!(self.len, other.len, "batch len mismatch");
        Batch {
            dim: self.dim,
            len: self.len,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_shape_and_finiteness() {
        assert!(Batch::from_vec(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Batch::from_vec(2, 2, vec![1.0, 2.0, 3.0, f64::NAN]).is_err());
        let b = Batch::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(b.get(1, 0), 3.0);
    }

    #[test]
    fn row_major_layout() {
        let b = Batch::from_fn(2, 3, |r, c| (r * 10 + c) as f64);
        assert_eq!(b.row(1), &[10.0, 11.0, 12.0]);
        assert_eq!(b.column(2), vec![2.0, 12.0]);
    }

    #[test]
    fn add_and_scale() {
        let a = Batch::from_vec(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let b = Batch::from_vec(1, 3, vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(a.add(&b).row(0), &[1.5, 2.5, 3.5]);
        assert_eq!(a.scaled(2.0).row(0), &[2.0, 4.0, 6.0]);
        assert_eq!(a.sum_sq(), 14.0);
    }
}
