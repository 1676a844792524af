use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// Twice differentiable function minimized on one level.
pub trait Objective<T: Scalar> {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> Result<T>;

    fn gradient(&self, x: &[T]) -> Result<Vec<T>>;

    fn hessian(&self, x: &[T]) -> Result<SparseMatrix<T>>;

    /// Actual reduction `h(x) - h(x + s)`.
    ///
    /// Implementations evaluate the difference directly where they can, so the
    /// result stays accurate when the reduction is many orders of magnitude
    /// below `|h(x)|`.
    fn decrease(&self, x: &[T], s: &[T]) -> Result<T> {
        let trial: Vec<T> = x.iter().zip(s).map(|(&a, &b)| a + b).collect();
        Ok(self.value(x)? - self.value(&trial)?)
    }
}

pub(crate) fn check_input<T: Scalar>(x: &[T], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}
