use std::num::NonZeroUsize;
use std::rc::Rc;

use lru::LruCache;
use rayon::prelude::*;

use super::Kernel;
use crate::data::Rows;

/// Kernel rows `K(x_i, ·)` computed on demand and kept in an LRU cache.
pub(crate) struct KernelCache<'a> {
    kernel: Kernel,
    x: Rows<'a>,
    rows: LruCache<usize, Rc<[f64]>>,
    pub(crate) misses: usize,
}

impl<'a> KernelCache<'a> {
    /// `capacity_bytes` is turned into a whole number of rows, at least two.
    pub(crate) fn new(kernel: Kernel, x: Rows<'a>, capacity_bytes: usize) -> Self {
        let row_bytes = x.len().max(1) * std::mem::size_of::<f64>();
        let rows = (capacity_bytes / row_bytes).clamp(2, x.len().max(2));
        Self {
            kernel,
            x,
            rows: LruCache::new(NonZeroUsize::new(rows).unwrap()),
            misses: 0,
        }
    }

    pub(crate) fn row(&mut self, i: usize) -> Rc<[f64]> {
        if let Some(r) = self.rows.get(&i) {
            return Rc::clone(r);
        }
        self.misses += 1;
        let xi = self.x.row(i);
        let n = self.x.len();
        let row: Vec<f64> = if n * self.x.dim() >= 1 << 14 {
            (0..n).into_par_iter().map(|j| self.kernel.eval(xi, self.x.row(j))).collect()
        } else {
            (0..n).map(|j| self.kernel.eval(xi, self.x.row(j))).collect()
        };
        let row: Rc<[f64]> = row.into();
        self.rows.put(i, Rc::clone(&row));
        row
    }
}
