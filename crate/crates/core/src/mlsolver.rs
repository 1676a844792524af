//! Recursive multilevel trust-region V-cycle, with and without truncated-basis
//! active-set handling.
//!
//! On every level the iterate is pre-smoothed by trust-region steps, a
//! Galerkin quadratic model and a box of admissible coarse iterates are built
//! for the next coarser level, the coarse problem is minimized recursively,
//! and the prolongated correction is accepted or rejected by the multilevel
//! ratio before post-smoothing.
//!
//! The coarse box is the intersection of two boxes:
//!
//! * the hard-constraint box: for coarse unknown `k`,
//!   `lower_k = x0_k + max_{j in supp k} (lb_j - x_j)` and
//!   `upper_k = x0_k + min_{j in supp k} (ub_j - x_j)`, where the support is
//!   taken from the prolongation actually used. Because prolongation rows are
//!   nonnegative with sums at most one, every coarse point inside it maps to a
//!   feasible fine trial point;
//! * the radius box `x0 +- delta`, which keeps `|I s|_inf <= delta`.
//!
//! In [`Variant::Mastr`] the rows of fine unknowns sitting on a hard bound are
//! removed from the prolongation before descending. Those components are then
//! frozen for all coarser levels and drop out of the coarse supports, so the
//! coarse boxes become wider.

use std::fmt;
use std::str::FromStr;

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::problems::Problem;
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;
use crate::transfer::{
    assemble_projection, assemble_prolongation, column_supports, galerkin_hessian, restrict_vector, truncate,
};
use crate::trstep::{apply_step, criticality, radius_update, tr_step, QuadraticModel, TrParams};

/// Largest roundoff tolerated when a prolongated correction leaves the fine box.
pub const FEASIBILITY_SLACK: f64 = 1e-12;
/// Largest tolerated move when clamping the projected coarse start into its box.
pub const PROJECTION_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Plain prolongation on every level.
    Rmtr,
    /// Truncated prolongation built from the active set of each finer level.
    Mastr,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Rmtr => "rmtr",
            Variant::Mastr => "mastr",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rmtr" => Ok(Variant::Rmtr),
            "mastr" => Ok(Variant::Mastr),
            other => Err(Error::InvalidParameter(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig<T> {
    /// Pre-smoothing steps per level.
    pub pre: usize,
    /// Post-smoothing steps per level.
    pub post: usize,
    /// Trust-region iterations on the coarsest level.
    pub coarse_its: usize,
    /// The coarsest solve stops once its criticality drops below this
    /// fraction of the entry criticality.
    pub coarse_rel_tol: T,
    pub tol: T,
    pub max_vcycles: usize,
    pub tr: TrParams<T>,
    /// Absolute distance to a bound under which a component counts as active.
    pub active_slack: T,
    /// Treat every active set as empty (MASTR then runs the RMTR path).
    pub force_empty_active_sets: bool,
}

impl<T: Scalar> Default for SolveConfig<T> {
    fn default() -> Self {
        Self {
            pre: 1,
            post: 1,
            coarse_its: 30,
            coarse_rel_tol: T::lit(1e-2),
            tol: T::lit(1e-9),
            max_vcycles: 100,
            tr: TrParams::default(),
            active_slack: T::zero(),
            force_empty_active_sets: false,
        }
    }
}

impl<T: Scalar> SolveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.tr.validate()?;
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.active_slack >= T::zero()) {
            return Err(Error::InvalidParameter("active-set slack must be nonnegative".into()));
        }
        if !(self.coarse_rel_tol >= T::zero()) {
            return Err(Error::InvalidParameter("coarse relative tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Per-level data of one V-cycle.
#[derive(Debug, Clone)]
pub struct LevelState<T> {
    pub level: usize,
    pub x: Vec<T>,
    /// Iterate the level was entered with.
    pub x0: Vec<T>,
    pub delta: T,
    /// Feasible set of this level (hard-constraint box intersected with the radius box).
    pub bounds_f: BoxBounds<T>,
    /// Hard-constraint component only; active sets are detected against it.
    pub bounds_l: BoxBounds<T>,
    /// Active set detected before the last descent from this level.
    pub active: Vec<usize>,
    /// Operator to the next finer level (possibly truncated); `None` on the finest level.
    pub prolongation: Option<SparseMatrix<T>>,
    /// Galerkin model minimized on this level; `None` on the finest level.
    pub model: Option<QuadraticModel<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub x_final: Vec<T>,
    pub vcycles: usize,
    pub converged: bool,
    /// Criticality of the start point.
    pub initial_criticality: T,
    /// `(vcycle, criticality)` after every cycle, 1-based.
    pub trace: Vec<(usize, T)>,
}

impl<T: Scalar> SolveResult<T> {
    pub fn final_criticality(&self) -> T {
        self.trace.last().map_or(self.initial_criticality, |t| t.1)
    }
}

/// Hooks into a running solve; every method defaults to a no-op.
pub trait SolveObserver<T> {
    /// Called whenever the iterate of `level` changes (or is confirmed after a step).
    fn on_iterate(&mut self, _level: usize, _x: &[T], _bounds: &BoxBounds<T>) {}

    /// Called after the coarse quantities are built, before the coarse level is solved.
    fn on_descent(&mut self, _fine: &LevelState<T>, _coarse: &LevelState<T>, _fine_gradient: &[T]) {}

    /// Called with the prolongated coarse correction on level `level`.
    fn on_correction(&mut self, _level: usize, _active: &[usize], _correction: &[T]) {}

    fn on_vcycle(&mut self, _cycle: usize, _criticality: T) {}
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl<T> SolveObserver<T> for NoObserver {}

/// Indices where `x` equals a finite bound (within `slack`).
pub fn detect_active_set<T: Scalar>(x: &[T], bounds: &BoxBounds<T>, slack: T) -> Vec<usize> {
    (0..x.len())
        .filter(|&k| {
            let (lb, ub) = (bounds.lb[k], bounds.ub[k]);
            (lb.is_finite() && x[k] - lb <= slack) || (ub.is_finite() && ub - x[k] <= slack)
        })
        .collect()
}

/// Hard-constraint box of the coarse level from the fine bounds and iterate.
///
/// `supports[k]` lists the fine unknowns where coarse basis function `k` is
/// nonzero. Infinite fine bounds impose nothing; an empty support freezes the
/// coarse unknown at its start value.
pub fn coarse_bounds_l<T: Scalar>(
    supports: &[Vec<usize>],
    lb_f: &[T],
    ub_f: &[T],
    x_f: &[T],
    x0_c: &[T],
) -> Result<BoxBounds<T>> {
    if supports.len() != x0_c.len() {
        return Err(Error::DimensionMismatch { expected: supports.len(), got: x0_c.len() });
    }
    if lb_f.len() != x_f.len() || ub_f.len() != x_f.len() {
        return Err(Error::DimensionMismatch { expected: x_f.len(), got: lb_f.len().min(ub_f.len()) });
    }
    let mut lb = Vec::with_capacity(x0_c.len());
    let mut ub = Vec::with_capacity(x0_c.len());
    for (k, support) in supports.iter().enumerate() {
        if support.is_empty() {
            lb.push(x0_c[k]);
            ub.push(x0_c[k]);
            continue;
        }
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        for &j in support {
            if j >= x_f.len() {
                return Err(Error::OutOfRange { index: j, size: x_f.len() });
            }
            if lb_f[j].is_finite() {
                lo = lo.max(lb_f[j] - x_f[j]);
            }
            if ub_f[j].is_finite() {
                hi = hi.min(ub_f[j] - x_f[j]);
            }
        }
        lb.push(if lo.is_finite() { x0_c[k] + lo } else { lo });
        ub.push(if hi.is_finite() { x0_c[k] + hi } else { hi });
    }
    BoxBounds::new(lb, ub)
}

/// Radius box `[x0 - delta, x0 + delta]`.
pub fn tr_bounds_s<T: Scalar>(x0_c: &[T], delta: T) -> Result<BoxBounds<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive and finite, got {delta}")));
    }
    BoxBounds::new(x0_c.iter().map(|&v| v - delta).collect(), x0_c.iter().map(|&v| v + delta).collect())
}

/// Galerkin model `<I^T g, e> + 1/2 <e, I^T H I e>` with `e = x - x0`.
pub fn build_coarse_model<T: Scalar>(
    prolongation: &SparseMatrix<T>,
    g_f: &[T],
    h_f: &SparseMatrix<T>,
    x0_c: &[T],
) -> Result<QuadraticModel<T>> {
    if x0_c.len() != prolongation.cols() {
        return Err(Error::DimensionMismatch { expected: prolongation.cols(), got: x0_c.len() });
    }
    let g = restrict_vector(prolongation, g_f)?;
    let h = galerkin_hessian(prolongation, h_f)?;
    QuadraticModel::new(x0_c.to_vec(), g, h, T::zero())
}

/// Ratio of the fine-level reduction to the reduction achieved on the coarse
/// model; `-inf` when the coarse reduction is not positive and finite.
pub fn multilevel_ratio<T: Scalar>(fine_reduction: T, coarse_reduction: T) -> T {
    if !(coarse_reduction > T::zero()) || !coarse_reduction.is_finite() {
        return T::neg_infinity();
    }
    let rho = fine_reduction / coarse_reduction;
    if rho.is_nan() {
        T::neg_infinity()
    } else {
        rho
    }
}

/// Accepts `x + s` when `rho > eta1` and updates the radius.
///
/// Returns the new iterate, the new radius and whether the step was taken.
pub fn convergence_control<T: Scalar>(
    rho: T,
    x: &[T],
    s: &[T],
    delta: T,
    params: &TrParams<T>,
    feasible: &BoxBounds<T>,
) -> Result<(Vec<T>, T, bool)> {
    let delta_new = radius_update(rho, delta, params);
    if !(rho > params.eta1) {
        return Ok((x.to_vec(), delta_new, false));
    }
    let trial: Vec<T> = x.iter().zip(s).map(|(&a, &b)| a + b).collect();
    feasible.check_feasible(&trial, usize::MAX, T::lit(FEASIBILITY_SLACK))?;
    Ok((apply_step(x, s, feasible), delta_new, true))
}

/// Multilevel solver bound to one problem and its transfer operators.
#[derive(Debug, Clone)]
pub struct MultilevelSolver<'a, T> {
    problem: &'a Problem<T>,
    variant: Variant,
    config: SolveConfig<T>,
    /// `prolongations[l]` maps level `l` to level `l + 1`.
    prolongations: Vec<SparseMatrix<T>>,
    /// `projections[l]` maps level `l + 1` to level `l`.
    projections: Vec<SparseMatrix<T>>,
}

impl<'a, T: Scalar> MultilevelSolver<'a, T> {
    pub fn new(problem: &'a Problem<T>, variant: Variant, config: SolveConfig<T>) -> Result<Self> {
        config.validate()?;
        let hier = problem.hierarchy();
        let prolongations = (0..hier.finest()).map(|l| assemble_prolongation(hier, l)).collect::<Result<Vec<_>>>()?;
        let projections = (1..hier.num_levels()).map(|l| assemble_projection(hier, l)).collect::<Result<Vec<_>>>()?;
        Ok(Self { problem, variant, config, prolongations, projections })
    }

    pub fn prolongation(&self, coarse_level: usize) -> &SparseMatrix<T> {
        &self.prolongations[coarse_level]
    }

    pub fn config(&self) -> &SolveConfig<T> {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn solve(&self) -> Result<SolveResult<T>> {
        self.solve_observed(&mut NoObserver)
    }

    /// Runs V-cycles from the problem's start point until the finest
    /// criticality drops below `tol` or `max_vcycles` is reached.
    pub fn solve_observed(&self, observer: &mut dyn SolveObserver<T>) -> Result<SolveResult<T>> {
        let problem = self.problem;
        let bounds = problem.bounds();
        let finest = problem.hierarchy().finest();
        let x = problem.x0().to_vec();
        bounds.check_feasible(&x, finest, T::zero())?;
        observer.on_iterate(finest, &x, bounds);
        let initial = criticality(&x, &problem.gradient(&x)?, bounds)?;
        let mut state = LevelState {
            level: finest,
            x0: x.clone(),
            x,
            delta: self.config.tr.delta0,
            bounds_f: bounds.clone(),
            bounds_l: bounds.clone(),
            active: Vec::new(),
            prolongation: None,
            model: None,
        };
        let mut e = initial;
        let mut trace = Vec::new();
        while e >= self.config.tol && trace.len() < self.config.max_vcycles {
            state.x0 = state.x.clone();
            self.vcycle(&mut state, observer)?;
            e = criticality(&state.x, &problem.gradient(&state.x)?, bounds)?;
            trace.push((trace.len() + 1, e));
            observer.on_vcycle(trace.len(), e);
        }
        Ok(SolveResult {
            x_final: state.x,
            vcycles: trace.len(),
            converged: e < self.config.tol,
            initial_criticality: initial,
            trace,
        })
    }

    /// One V-cycle from `state.level` down to the coarsest level and back.
    pub fn vcycle(&self, state: &mut LevelState<T>, observer: &mut dyn SolveObserver<T>) -> Result<()> {
        if state.level == 0 {
            return Err(Error::InvalidParameter("a V-cycle needs a coarser level".into()));
        }
        let model = state.model.take();
        let result = match &model {
            Some(m) => self.vcycle_with(m, state, observer),
            None => self.vcycle_with(self.problem, state, observer),
        };
        state.model = model;
        result
    }

    fn vcycle_with<O: Objective<T> + ?Sized>(
        &self,
        objective: &O,
        state: &mut LevelState<T>,
        observer: &mut dyn SolveObserver<T>,
    ) -> Result<()> {
        let cfg = &self.config;
        for _ in 0..cfg.pre {
            self.smooth(objective, state, observer)?;
        }

        let gradient = objective.gradient(&state.x)?;
        let mut coarse = self.descend(objective, state, &gradient)?;
        observer.on_descent(state, &coarse, &gradient);

        if coarse.level == 0 {
            self.coarse_solve(&mut coarse, observer)?;
        } else {
            self.vcycle(&mut coarse, observer)?;
        }

        let op = coarse.prolongation.as_ref().expect("coarse level carries its prolongation");
        let model = coarse.model.as_ref().expect("coarse level carries its model");
        let coarse_step: Vec<T> = coarse.x.iter().zip(&coarse.x0).map(|(&a, &b)| a - b).collect();
        let correction = op.mul_vec(&coarse_step)?;
        observer.on_correction(state.level, &state.active, &correction);

        let coarse_reduction = model.decrease(&coarse.x0, &coarse_step)?;
        let rho = if coarse_reduction > T::zero() {
            multilevel_ratio(objective.decrease(&state.x, &correction)?, coarse_reduction)
        } else {
            T::neg_infinity()
        };
        let (x, delta, _) = convergence_control(rho, &state.x, &correction, state.delta, &cfg.tr, &state.bounds_f)
            .map_err(|e| with_level(e, state.level))?;
        state.x = x;
        state.delta = delta;
        observer.on_iterate(state.level, &state.x, &state.bounds_f);

        for _ in 0..cfg.post {
            self.smooth(objective, state, observer)?;
        }
        Ok(())
    }

    fn smooth<O: Objective<T> + ?Sized>(
        &self,
        objective: &O,
        state: &mut LevelState<T>,
        observer: &mut dyn SolveObserver<T>,
    ) -> Result<()> {
        tr_step(objective, &mut state.x, &state.bounds_f, &mut state.delta, &self.config.tr)
            .map_err(|e| with_level(e, state.level))?;
        state.bounds_f.check_feasible(&state.x, state.level, T::zero())?;
        observer.on_iterate(state.level, &state.x, &state.bounds_f);
        Ok(())
    }

    /// Builds the coarse level: active set, transfer operator, start point,
    /// feasible set and Galerkin model.
    fn descend<O: Objective<T> + ?Sized>(
        &self,
        objective: &O,
        fine: &mut LevelState<T>,
        gradient: &[T],
    ) -> Result<LevelState<T>> {
        let level = fine.level - 1;
        fine.active = match self.variant {
            Variant::Mastr if !self.config.force_empty_active_sets => {
                detect_active_set(&fine.x, &fine.bounds_l, self.config.active_slack)
            }
            _ => Vec::new(),
        };
        let op = truncate(&self.prolongations[level], &fine.active)?;

        let x0_raw = self.projections[level].mul_vec(&fine.x)?;
        let supports = column_supports(&op);
        let bounds_l = coarse_bounds_l(&supports, &fine.bounds_f.lb, &fine.bounds_f.ub, &fine.x, &x0_raw)?;
        let bounds_s = tr_bounds_s(&x0_raw, fine.delta)?;
        let bounds_f = bounds_l.intersect(&bounds_s)?;
        let x0 = bounds_f.project(&x0_raw);
        let (moved, index) = BoxBounds { lb: x0_raw.clone(), ub: x0_raw.clone() }.max_violation(&x0);
        if moved > T::lit(PROJECTION_SLACK) {
            return Err(Error::Infeasible { level, index, violation: moved.to_f64().unwrap_or(f64::INFINITY) });
        }

        let hessian = objective.hessian(&fine.x)?;
        let model = build_coarse_model(&op, gradient, &hessian, &x0)?;
        Ok(LevelState {
            level,
            x: x0.clone(),
            x0,
            delta: fine.delta,
            bounds_f,
            bounds_l,
            active: Vec::new(),
            prolongation: Some(op),
            model: Some(model),
        })
    }

    fn coarse_solve(&self, coarse: &mut LevelState<T>, observer: &mut dyn SolveObserver<T>) -> Result<()> {
        let model = coarse.model.take().expect("coarse model");
        let entry = criticality(&coarse.x, &model.gradient(&coarse.x)?, &coarse.bounds_f)?;
        let stop = self.config.coarse_rel_tol * entry;
        let result = (|| {
            if entry == T::zero() {
                return Ok(());
            }
            for _ in 0..self.config.coarse_its {
                self.smooth(&model, coarse, observer)?;
                if criticality(&coarse.x, &model.gradient(&coarse.x)?, &coarse.bounds_f)? < stop {
                    break;
                }
            }
            Ok(())
        })();
        coarse.model = Some(model);
        result
    }
}

fn with_level(e: Error, level: usize) -> Error {
    match e {
        Error::Infeasible { index, violation, .. } => Error::Infeasible { level, index, violation },
        other => other,
    }
}

/// Convenience wrapper: builds the solver and runs it.
pub fn solve<T: Scalar>(problem: &Problem<T>, variant: Variant, config: SolveConfig<T>) -> Result<SolveResult<T>> {
    MultilevelSolver::new(problem, variant, config)?.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemKind;

    #[test]
    fn active_set_examples() {
        let b = BoxBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(detect_active_set(&[0.0, 0.3], &b, 0.0), vec![0]);
        assert!(detect_active_set(&[0.5, 0.3], &b, 0.0).is_empty());
        let open = BoxBounds::new(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).unwrap();
        assert!(detect_active_set(&[-1e300], &open, 0.0).is_empty());
        assert_eq!(detect_active_set(&[1.0, 0.99], &b, 0.02), vec![0, 1]);
    }

    #[test]
    fn coarse_bound_examples() {
        let inf = f64::INFINITY;
        let sup = vec![vec![0, 1]];
        let b = coarse_bounds_l(&sup, &[-0.4, -0.1], &[inf, inf], &[0.0, 0.0], &[0.2]).unwrap();
        assert!((b.lb[0] - 0.1).abs() < 1e-16);
        assert_eq!(b.ub[0], inf);
        let b = coarse_bounds_l(&sup, &[-inf, -inf], &[inf, inf], &[0.0, 0.0], &[0.2]).unwrap();
        assert_eq!(b.lb[0], -inf);
        let b = coarse_bounds_l(&[vec![]], &[-1.0], &[1.0], &[0.0], &[0.3]).unwrap();
        assert_eq!((b.lb[0], b.ub[0]), (0.3, 0.3));
    }

    #[test]
    fn radius_box() {
        let b = tr_bounds_s(&[0.0, 1.0], 0.5).unwrap();
        assert_eq!(b.lb, vec![-0.5, 0.5]);
        assert_eq!(b.ub, vec![0.5, 1.5]);
        assert!(tr_bounds_s(&[0.0], f64::INFINITY).is_err());
        assert!(tr_bounds_s(&[0.0], 0.0).is_err());
    }

    #[test]
    fn ratio_sentinels() {
        assert_eq!(multilevel_ratio(1.0, 1.0), 1.0);
        assert_eq!(multilevel_ratio(-0.5, 1.0), -0.5);
        assert_eq!(multilevel_ratio(1.0, 0.0), f64::NEG_INFINITY);
        assert_eq!(multilevel_ratio(1.0, f64::NAN), f64::NEG_INFINITY);
    }

    #[test]
    fn convergence_control_cases() {
        let p = TrParams::<f64>::default();
        let f = BoxBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let (x, d, ok) = convergence_control(1.0, &[0.5, 0.5], &[0.1, -0.5], 1.0, &p, &f).unwrap();
        assert!(ok);
        assert_eq!(d, 2.0);
        assert_eq!(x[1], 0.0);
        let (x, d, ok) = convergence_control(f64::NEG_INFINITY, &[0.5, 0.5], &[0.1, 0.1], 1.0, &p, &f).unwrap();
        assert!(!ok);
        assert_eq!((x, d), (vec![0.5, 0.5], 0.5));
        assert!(convergence_control(1.0, &[0.5, 0.5], &[0.0, -0.6], 1.0, &p, &f).is_err());
    }

    #[test]
    fn coarse_model_is_anchored() {
        let op = SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 0, 0.5), (1, 1, 0.5), (2, 1, 1.0)]).unwrap();
        let h = SparseMatrix::from_diagonal(&[2.0, 1.0, 3.0]);
        let g = [1.0, -2.0, 0.5];
        let m = build_coarse_model(&op, &g, &h, &[0.3, -0.1]).unwrap();
        assert_eq!(m.value(&[0.3, -0.1]).unwrap(), 0.0);
        assert_eq!(m.gradient(&[0.3, -0.1]).unwrap(), restrict_vector(&op, &g).unwrap());
        let t = truncate(&op, &[2, 1]).unwrap();
        let m = build_coarse_model(&t, &g, &h, &[0.0, 0.0]).unwrap();
        assert_eq!(m.gradient(&[0.7, -4.0]).unwrap()[1], 0.0);
    }

    #[test]
    fn single_cycle_limit_reports_non_convergence() {
        let p = Problem::<f64>::build(ProblemKind::Membrane, 2, 4).unwrap();
        let cfg = SolveConfig { max_vcycles: 1, ..Default::default() };
        let r = solve(&p, Variant::Mastr, cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.trace.len(), 1);
        assert!(r.trace[0].1 < r.initial_criticality);
    }
}
