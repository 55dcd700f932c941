use crate::error::{Error, Result};

/// Borrowed row-major matrix: `len()` rows of `dim()` values each.
#[derive(Debug, Clone, Copy)]
pub struct Rows<'a> {
    values: &'a [f64],
    dim: usize,
}

impl<'a> Rows<'a> {
    pub fn new(values: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("row dimension must be at least 1".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * (values.len() / dim + 1),
                found: values.len(),
            });
        }
        Ok(Self { values, dim })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &'a [f64]> + 'a {
        self.values.chunks_exact(self.dim)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
