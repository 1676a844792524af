//! Projected-gradient reference solver for small instances.
//!
//! Deliberately naive: it only evaluates the objective and never touches the
//! trust-region or multilevel code, so agreement with the solvers is an
//! independent check.

use mastr::{BoxBounds64, Objective, Problem64};

use crate::{BenchError, Result};

pub const ORACLE_MAX_DOFS: usize = 2000;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub criticality: f64,
    /// False when `max_its` ran out first; `x` is then the last iterate.
    pub converged: bool,
}

fn project(x: &[f64], bounds: &BoxBounds64) -> Vec<f64> {
    x.iter().zip(bounds.lb.iter().zip(&bounds.ub)).map(|(&v, (&l, &u))| v.max(l).min(u)).collect()
}

fn pg_norm(x: &[f64], g: &[f64], bounds: &BoxBounds64) -> f64 {
    let trial: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    project(&trial, bounds).iter().zip(x).map(|(p, v)| (p - v) * (p - v)).sum::<f64>().sqrt()
}

/// Projected gradient with Armijo backtracking along the projection arc,
/// started from `x0` projected into the box.
pub fn projected_gradient<O: Objective<f64> + ?Sized>(
    objective: &O,
    bounds: &BoxBounds64,
    x0: &[f64],
    tol: f64,
    max_its: usize,
) -> Result<OracleResult> {
    let mut x = project(x0, bounds);
    let mut g = objective.gradient(&x)?;
    let mut e = pg_norm(&x, &g, bounds);
    let mut t = 1.0;
    let mut iterations = 0;
    while e >= tol && iterations < max_its {
        iterations += 1;
        t *= 2.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let x_new = project(&trial, bounds);
            let d: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            // The objective's own difference formula keeps the test meaningful
            // once reductions fall below the rounding level of f itself.
            if objective.decrease(&x, &d)? >= -1e-4 * slope || t < 1e-14 {
                x = x_new;
                break;
            }
            t *= 0.5;
        }
        g = objective.gradient(&x)?;
        e = pg_norm(&x, &g, bounds);
    }
    Ok(OracleResult { x, iterations, criticality: e, converged: e < tol })
}

/// Oracle on a benchmark problem; refuses instances above [`ORACLE_MAX_DOFS`].
pub fn oracle_projected_gradient(problem: &Problem64, tol: f64, max_its: usize) -> Result<OracleResult> {
    if problem.n_dofs() > ORACLE_MAX_DOFS {
        return Err(BenchError::Config(format!(
            "oracle is limited to {ORACLE_MAX_DOFS} unknowns, problem has {}",
            problem.n_dofs()
        )));
    }
    projected_gradient(problem, problem.bounds(), problem.x0(), tol, max_its)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mastr::{ProblemKind, SparseMatrix64};

    /// `x^2/2 - x`.
    struct Parabola;

    impl Objective<f64> for Parabola {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> mastr::Result<f64> {
            Ok(0.5 * x[0] * x[0] - x[0])
        }
        fn gradient(&self, x: &[f64]) -> mastr::Result<Vec<f64>> {
            Ok(vec![x[0] - 1.0])
        }
        fn hessian(&self, _x: &[f64]) -> mastr::Result<SparseMatrix64> {
            Ok(SparseMatrix64::identity(1))
        }
    }

    #[test]
    fn interior_and_bound_minimizers() {
        let b = BoxBounds64::new(vec![0.0], vec![10.0]).unwrap();
        let r = projected_gradient(&Parabola, &b, &[7.0], 1e-12, 100).unwrap();
        assert!(r.converged && (r.x[0] - 1.0).abs() < 1e-12);
        let b = BoxBounds64::new(vec![0.0], vec![0.5]).unwrap();
        let r = projected_gradient(&Parabola, &b, &[0.0], 1e-12, 100).unwrap();
        assert!(r.converged && r.x[0] == 0.5);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let p = Problem64::build(ProblemKind::Membrane, 2, 4).unwrap();
        let r = oracle_projected_gradient(&p, 1e-9, 3).unwrap();
        assert!(!r.converged && r.iterations == 3);
    }

    #[test]
    fn large_instances_are_refused() {
        let p = Problem64::build(ProblemKind::Membrane, 4, 8).unwrap();
        assert!(oracle_projected_gradient(&p, 1e-9, 1).is_err());
    }
}
