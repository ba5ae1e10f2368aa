//! Labelled regression data.
//!
//! Features are stored row-major in one contiguous buffer so that the ridge
//! solvers can view a dataset as a matrix without copying point by point.

use crate::error::{Error, Result};

/// A single `(x, y)` observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// An ordered sequence of observations sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    /// An empty dataset of feature dimension `dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            xs: Vec::new(),
            ys: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            xs: Vec::with_capacity(n * dim),
            ys: Vec::with_capacity(n),
        }
    }

    /// Builds a dataset from a row-major feature buffer and labels.
    pub fn from_flat(dim: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != dim * ys.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * ys.len(),
                found: xs.len(),
            });
        }
        if let Some(bad) = ys.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} is not finite"
            )));
        }
        Ok(Self { dim, xs, ys })
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = DataPoint>) -> Result<Self> {
        let mut data = Self::empty(dim);
        for p in points {
            data.push(&p.x, p.y)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if !y.is_finite() {
            return Err(Error::InvalidParameter(format!("label {y} is not finite")));
        }
        self.xs.extend_from_slice(x);
        self.ys.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.ys
    }

    /// Row-major feature buffer, `len() * dim()` entries.
    pub fn features(&self) -> &[f64] {
        &self.xs
    }

    pub fn point(&self, i: usize) -> DataPoint {
        DataPoint::new(self.x(i).to_vec(), self.y(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.len()).map(move |i| (self.x(i), self.y(i)))
    }

    /// Points at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut out = Dataset::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.xs.extend_from_slice(self.x(i));
            out.ys.push(self.ys[i]);
        }
        out
    }

    /// All points except those at the (sorted or unsorted) `excluded` indices.
    pub fn excluding(&self, excluded: &[usize]) -> Dataset {
        let mut drop = vec![false; self.len()];
        for &i in excluded {
            drop[i] = true;
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| !drop[i]).collect();
        self.subset(&keep)
    }

    /// A copy with one extra point appended.
    pub fn with_point(&self, x: &[f64], y: f64) -> Result<Dataset> {
        let mut out = Dataset::with_capacity(self.dim, self.len() + 1);
        out.xs.extend_from_slice(&self.xs);
        out.ys.extend_from_slice(&self.ys);
        out.push(x, y)?;
        Ok(out)
    }

    /// Splits into the first `n0` points and the remainder.
    pub fn split_at(&self, n0: usize) -> (Dataset, Dataset) {
        let n0 = n0.min(self.len());
        let head = Dataset {
            dim: self.dim,
            xs: self.xs[..n0 * self.dim].to_vec(),
            ys: self.ys[..n0].to_vec(),
        };
        let tail = Dataset {
            dim: self.dim,
            xs: self.xs[n0 * self.dim..].to_vec(),
            ys: self.ys[n0..].to_vec(),
        };
        (head, tail)
    }

    pub fn permuted(&self, perm: &[usize]) -> Dataset {
        self.subset(perm)
    }

    pub fn max_abs_label(&self) -> f64 {
        self.ys.iter().fold(0.0_f64, |m, y| m.max(y.abs()))
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_dimension() {
        let mut d = Dataset::empty(2);
        assert!(d.push(&[1.0], 0.0).is_err());
        assert!(d.push(&[1.0, 2.0], f64::NAN).is_err());
        d.push(&[1.0, 2.0], 3.0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.x(0), &[1.0, 2.0]);
    }

    #[test]
    fn subset_excluding_and_split() {
        let d =
            Dataset::from_flat(1, vec![0.0, 1.0, 2.0, 3.0], vec![10.0, 11.0, 12.0, 13.0]).unwrap();
        assert_eq!(d.excluding(&[1, 3]).labels(), &[10.0, 12.0]);
        assert_eq!(d.subset(&[3, 0]).labels(), &[13.0, 10.0]);
        let (a, b) = d.split_at(1);
        assert_eq!(a.len(), 1);
        assert_eq!(b.labels(), &[11.0, 12.0, 13.0]);
        let e = d.with_point(&[4.0], 14.0).unwrap();
        assert_eq!(e.len(), 5);
        assert_eq!(d.len(), 4);
    }
}
