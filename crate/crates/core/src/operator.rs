use core::cell::Cell;

use crate::linalg::DenseMatrix;

/// A square linear map `x ↦ A x` on `ℝⁿ`.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> alloc::vec::Vec<f64> {
        let mut y = alloc::vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.rows(), self.cols());
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Wraps an operator and counts matrix-vector products.
pub struct CountingOperator<A> {
    inner: A,
    count: Cell<usize>,
}

impl<A: LinearOperator> CountingOperator<A> {
    pub fn new(inner: A) -> Self {
        CountingOperator { inner, count: Cell::new(0) }
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }
}

impl<A: LinearOperator> LinearOperator for CountingOperator<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.count.set(self.count.get() + 1);
        self.inner.apply(x, y);
    }
}
