use crate::error::{Error, Result};
use crate::scalar::{clamp, Scalar};

/// Per-component lower and upper bounds; absent bounds are `-inf` / `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds<T> {
    pub lb: Vec<T>,
    pub ub: Vec<T>,
}

impl<T: Scalar> BoxBounds<T> {
    pub fn new(lb: Vec<T>, ub: Vec<T>) -> Result<Self> {
        if lb.len() != ub.len() {
            return Err(Error::DimensionMismatch { expected: lb.len(), got: ub.len() });
        }
        if let Some(index) = (0..lb.len()).find(|&i| !(lb[i] <= ub[i])) {
            return Err(Error::EmptyBox {
                index,
                lower: lb[index].to_f64().unwrap_or(f64::NAN),
                upper: ub[index].to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { lb, ub })
    }

    pub fn unbounded(n: usize) -> Self {
        Self { lb: vec![T::neg_infinity(); n], ub: vec![T::infinity(); n] }
    }

    pub fn len(&self) -> usize {
        self.lb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lb.is_empty()
    }

    pub fn project(&self, x: &[T]) -> Vec<T> {
        x.iter().enumerate().map(|(i, &v)| clamp(v, self.lb[i], self.ub[i])).collect()
    }

    pub fn project_in_place(&self, x: &mut [T]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = clamp(*v, self.lb[i], self.ub[i]);
        }
    }

    /// Componentwise intersection.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        let lb = self.lb.iter().zip(&other.lb).map(|(&a, &b)| a.max(b)).collect();
        let ub = self.ub.iter().zip(&other.ub).map(|(&a, &b)| a.min(b)).collect();
        Self::new(lb, ub)
    }

    /// Largest amount by which `x` leaves the box, and where (`0` when feasible).
    pub fn max_violation(&self, x: &[T]) -> (T, usize) {
        let mut worst = (T::zero(), 0);
        for (i, &v) in x.iter().enumerate() {
            let viol = (self.lb[i] - v).max(v - self.ub[i]);
            if viol > worst.0 || viol.is_nan() {
                worst = (if viol.is_nan() { T::infinity() } else { viol }, i);
            }
        }
        worst
    }

    pub fn check_feasible(&self, x: &[T], level: usize, tol: T) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        let (viol, index) = self.max_violation(x);
        if viol > tol {
            return Err(Error::Infeasible { level, index, violation: viol.to_f64().unwrap_or(f64::INFINITY) });
        }
        Ok(())
    }
}
