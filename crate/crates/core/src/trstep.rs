//! Single-level trust-region iteration with an infinity-norm trust region.
//!
//! The subproblem `min m(s)` over `{x + s in F, |s|_inf <= delta}` is a box
//! constrained quadratic program, solved approximately by sweeps of exact
//! coordinate minimization.

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::objective::{check_input, Objective};
use crate::scalar::{clamp, norm2, Scalar};
use crate::sparse::SparseMatrix;

/// `m(s) = c + <g, s> + 1/2 <s, H s>` with `s = x - x_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel<T> {
    pub x_ref: Vec<T>,
    pub g: Vec<T>,
    pub h: SparseMatrix<T>,
    pub c: T,
}

impl<T: Scalar> QuadraticModel<T> {
    pub fn new(x_ref: Vec<T>, g: Vec<T>, h: SparseMatrix<T>, c: T) -> Result<Self> {
        let n = x_ref.len();
        if g.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.len() });
        }
        if h.rows() != n || h.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.rows() });
        }
        Ok(Self { x_ref, g, h, c })
    }

    /// Model value at step `s` (relative to `x_ref`).
    pub fn eval_step(&self, s: &[T]) -> T {
        let hs = self.h.mul_vec(s).expect("step length matches model");
        self.c + self.change(s, &hs)
    }

    /// `<g, s> + 1/2 <s, H s>` given `H s`.
    fn change(&self, s: &[T], hs: &[T]) -> T {
        let half = T::lit(0.5);
        s.iter().zip(&self.g).zip(hs).fold(T::zero(), |acc, ((&si, &gi), &hi)| acc + si * (gi + half * hi))
    }

    fn offset(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.x_ref).map(|(&a, &b)| a - b).collect()
    }
}

impl<T: Scalar> Objective<T> for QuadraticModel<T> {
    fn dim(&self) -> usize {
        self.x_ref.len()
    }

    fn value(&self, x: &[T]) -> Result<T> {
        check_input(x, self.dim())?;
        Ok(self.eval_step(&self.offset(x)))
    }

    fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        check_input(x, self.dim())?;
        let hd = self.h.mul_vec(&self.offset(x))?;
        Ok(self.g.iter().zip(hd).map(|(&g, hd)| g + hd).collect())
    }

    fn hessian(&self, x: &[T]) -> Result<SparseMatrix<T>> {
        check_input(x, self.dim())?;
        Ok(self.h.clone())
    }

    fn decrease(&self, x: &[T], s: &[T]) -> Result<T> {
        check_input(s, self.dim())?;
        // h(x) - h(x+s) = -(<grad h(x), s> + 1/2 <s, H s>)
        let grad = self.gradient(x)?;
        let hs = self.h.mul_vec(s)?;
        let half = T::lit(0.5);
        Ok(-s.iter().zip(&grad).zip(&hs).fold(T::zero(), |acc, ((&si, &gi), &hi)| acc + si * (gi + half * hi)))
    }
}

/// Trust-region policy constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrParams<T> {
    /// Acceptance threshold.
    pub eta1: T,
    /// Expansion threshold.
    pub eta2: T,
    pub gamma_shrink: T,
    pub gamma_grow: T,
    pub delta0: T,
    pub delta_max: T,
    /// Coordinate-minimization sweeps per subproblem.
    pub cd_sweeps: usize,
}

impl<T: Scalar> Default for TrParams<T> {
    fn default() -> Self {
        Self {
            eta1: T::lit(0.1),
            eta2: T::lit(0.75),
            gamma_shrink: T::lit(0.5),
            gamma_grow: T::lit(2.0),
            delta0: T::one(),
            delta_max: T::lit(1e3),
            cd_sweeps: 1,
        }
    }
}

impl<T: Scalar> TrParams<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = T::zero() < self.eta1
            && self.eta1 < self.eta2
            && self.eta2 < T::one()
            && T::zero() < self.gamma_shrink
            && self.gamma_shrink < T::one()
            && T::one() < self.gamma_grow
            && T::zero() < self.delta0
            && self.delta0 <= self.delta_max
            && self.delta_max.is_finite()
            && self.cd_sweeps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("trust-region constants out of range: {self:?}")))
        }
    }
}

/// Criticality `|P(x - g) - x|_2` for the projection `P` onto `bounds`.
pub fn criticality<T: Scalar>(x: &[T], g: &[T], bounds: &BoxBounds<T>) -> Result<T> {
    if x.len() != g.len() || x.len() != bounds.len() {
        return Err(Error::DimensionMismatch { expected: bounds.len(), got: x.len().min(g.len()) });
    }
    bounds.check_feasible(x, usize::MAX, T::zero())?;
    let d: Vec<T> = (0..x.len()).map(|i| clamp(x[i] - g[i], bounds.lb[i], bounds.ub[i]) - x[i]).collect();
    Ok(norm2(&d))
}

/// Box of admissible steps `[max(lb - x, -delta), min(ub - x, delta)]` over
/// every supplied set.
pub fn intersect_feasible<T: Scalar>(
    feasible: &BoxBounds<T>,
    extra: Option<&BoxBounds<T>>,
    x: &[T],
    delta: T,
) -> Result<BoxBounds<T>> {
    if x.len() != feasible.len() {
        return Err(Error::DimensionMismatch { expected: feasible.len(), got: x.len() });
    }
    let mut lb: Vec<T> = (0..x.len()).map(|i| (feasible.lb[i] - x[i]).max(-delta)).collect();
    let mut ub: Vec<T> = (0..x.len()).map(|i| (feasible.ub[i] - x[i]).min(delta)).collect();
    if let Some(extra) = extra {
        if extra.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: extra.len() });
        }
        for i in 0..x.len() {
            lb[i] = lb[i].max(extra.lb[i] - x[i]);
            ub[i] = ub[i].min(extra.ub[i] - x[i]);
        }
    }
    let step = BoxBounds::new(lb, ub)?;
    if let Some(i) = (0..step.len()).find(|&i| step.lb[i] > T::zero() || step.ub[i] < T::zero()) {
        return Err(Error::Infeasible {
            level: usize::MAX,
            index: i,
            violation: step.lb[i].max(-step.ub[i]).to_f64().unwrap_or(f64::INFINITY),
        });
    }
    Ok(step)
}

/// Approximate minimizer of the model over `step_box` by `sweeps` passes of
/// exact coordinate minimization in index order.
pub fn solve_subproblem_cd<T: Scalar>(
    model: &QuadraticModel<T>,
    step_box: &BoxBounds<T>,
    sweeps: usize,
) -> Result<Vec<T>> {
    let n = model.dim();
    if step_box.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: step_box.len() });
    }
    if sweeps == 0 {
        return Err(Error::InvalidParameter("at least one coordinate sweep is required".into()));
    }
    if let Some(i) = (0..n).find(|&i| !(step_box.lb[i] <= T::zero() && T::zero() <= step_box.ub[i])) {
        return Err(Error::EmptyBox {
            index: i,
            lower: step_box.lb[i].to_f64().unwrap_or(f64::NAN),
            upper: step_box.ub[i].to_f64().unwrap_or(f64::NAN),
        });
    }
    let half = T::lit(0.5);
    let h = &model.h;
    // Running residual g + H s.
    let mut r = model.g.clone();
    let mut s = vec![T::zero(); n];
    for _ in 0..sweeps {
        for j in 0..n {
            let hjj = h.get(j, j);
            let gj = r[j];
            let (lo, hi) = (step_box.lb[j], step_box.ub[j]);
            let target = if hjj > T::zero() {
                clamp(s[j] - gj / hjj, lo, hi)
            } else {
                // Concave or flat along this coordinate: best endpoint, or stay.
                let phi = |t: T| {
                    let d = t - s[j];
                    gj * d + half * hjj * d * d
                };
                let mut best = (T::zero(), s[j]);
                for t in [lo, hi] {
                    if t.is_finite() {
                        let v = phi(t);
                        if v < best.0 {
                            best = (v, t);
                        }
                    }
                }
                best.1
            };
            let d = target - s[j];
            if d != T::zero() {
                s[j] = target;
                let (cols, vals) = h.row(j);
                for (&c, &v) in cols.iter().zip(vals) {
                    r[c] = r[c] + v * d;
                }
            }
        }
    }
    let hs = h.mul_vec(&s)?;
    if model.change(&s, &hs) < T::zero() {
        return Ok(s);
    }
    Ok(projected_cauchy_step(model, step_box).unwrap_or(s))
}

/// Backtracking along the projected steepest-descent path.
fn projected_cauchy_step<T: Scalar>(model: &QuadraticModel<T>, step_box: &BoxBounds<T>) -> Option<Vec<T>> {
    let pg: Vec<T> = (0..model.dim()).map(|i| clamp(-model.g[i], step_box.lb[i], step_box.ub[i])).collect();
    if pg.iter().all(|&v| v == T::zero()) {
        return None;
    }
    let mut t = T::one();
    for _ in 0..60 {
        let s: Vec<T> = (0..model.dim()).map(|i| clamp(-t * model.g[i], step_box.lb[i], step_box.ub[i])).collect();
        let hs = model.h.mul_vec(&s).ok()?;
        if model.change(&s, &hs) < T::zero() {
            return Some(s);
        }
        t = t * T::lit(0.5);
    }
    None
}

/// New radius given the acceptance ratio.
pub fn radius_update<T: Scalar>(rho: T, delta: T, params: &TrParams<T>) -> T {
    if rho.is_nan() || rho <= params.eta1 {
        params.gamma_shrink * delta
    } else if rho > params.eta2 {
        (params.gamma_grow * delta).min(params.delta_max)
    } else {
        delta
    }
}

/// `x + s` with components that reach a bound set to the bound value itself.
pub(crate) fn apply_step<T: Scalar>(x: &[T], s: &[T], bounds: &BoxBounds<T>) -> Vec<T> {
    (0..x.len())
        .map(|i| {
            if s[i] == T::zero() {
                x[i]
            } else if s[i] <= bounds.lb[i] - x[i] {
                bounds.lb[i]
            } else if s[i] >= bounds.ub[i] - x[i] {
                bounds.ub[i]
            } else {
                clamp(x[i] + s[i], bounds.lb[i], bounds.ub[i])
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrOutcome<T> {
    pub accepted: bool,
    pub rho: T,
    /// Predicted reduction `m(0) - m(s)`.
    pub predicted: T,
    /// Actual reduction `h(x) - h(x + s)` (zero when no step was tried).
    pub actual: T,
}

/// One trust-region iteration on `objective` from `x` inside `feasible`.
///
/// Updates `x` and `delta` in place.
pub fn tr_step<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    x: &mut Vec<T>,
    feasible: &BoxBounds<T>,
    delta: &mut T,
    params: &TrParams<T>,
) -> Result<TrOutcome<T>> {
    if !(*delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("trust-region radius must be positive and finite, got {delta}")));
    }
    let g = objective.gradient(x)?;
    let h = objective.hessian(x)?;
    let model = QuadraticModel::new(vec![T::zero(); x.len()], g, h, T::zero())?;
    let step_box = intersect_feasible(feasible, None, x, *delta)?;
    let s = solve_subproblem_cd(&model, &step_box, params.cd_sweeps)?;
    let predicted = -model.eval_step(&s);
    if !(predicted > T::zero()) {
        *delta = params.gamma_shrink * *delta;
        return Ok(TrOutcome { accepted: false, rho: T::neg_infinity(), predicted, actual: T::zero() });
    }
    let actual = objective.decrease(x, &s)?;
    let rho = actual / predicted;
    let accepted = rho > params.eta1;
    if accepted {
        *x = apply_step(x, &s, feasible);
    }
    *delta = radius_update(rho, *delta, params);
    Ok(TrOutcome { accepted, rho, predicted, actual })
}

/// One trust-region iteration returning the updated state and the
/// criticality at the new iterate.
pub fn tr_iteration<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    x: &[T],
    feasible: &BoxBounds<T>,
    extra: Option<&BoxBounds<T>>,
    delta: T,
    params: &TrParams<T>,
) -> Result<(Vec<T>, T, bool, T)> {
    let merged;
    let feasible = match extra {
        Some(s) => {
            merged = feasible.intersect(s)?;
            &merged
        }
        None => feasible,
    };
    let mut x = x.to_vec();
    let mut delta = delta;
    let out = tr_step(objective, &mut x, feasible, &mut delta, params)?;
    let e = criticality(&x, &objective.gradient(&x)?, feasible)?;
    Ok((x, delta, out.accepted, e))
}
