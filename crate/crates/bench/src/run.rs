//! The `run` command: solve one benchmark with one or both variants.

use std::path::PathBuf;

use mastr::{MultilevelSolver, Problem64, SolveObserver, SolveResult64, Variant};

use crate::config::RunConfig;
use crate::report::write_trace_csv;
use crate::{BenchError, Result};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rmtr: Option<SolveResult64>,
    pub mastr: Option<SolveResult64>,
    pub csv: PathBuf,
}

impl RunOutcome {
    /// Every variant that ran reached the tolerance.
    pub fn converged(&self) -> bool {
        self.rmtr.iter().chain(&self.mastr).all(|r| r.converged)
    }
}

pub fn solve_variant(
    problem: &Problem64,
    variant: Variant,
    cfg: &RunConfig,
    observer: &mut dyn SolveObserver<f64>,
) -> Result<SolveResult64> {
    let solver = MultilevelSolver::new(problem, variant, cfg.solve)?;
    Ok(solver.solve_observed(observer)?)
}

/// Builds the problem, solves the requested variants (concurrently when both
/// are requested) and writes the trace CSV to `cfg.out` or `<problem>.csv`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let kind = cfg.problem.ok_or_else(|| BenchError::Config("`run` needs --problem".into()))?;
    let csv = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("{kind}.csv")));
    let problem = Problem64::build(kind, cfg.levels, cfg.coarse_cells)?;
    let variants = cfg.variant.variants();

    let results: Vec<(Variant, Result<SolveResult64>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&v| {
                let problem = &problem;
                scope.spawn(move || (v, solve_variant(problem, v, cfg, &mut mastr::NoObserver)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });

    let mut outcome = RunOutcome { rmtr: None, mastr: None, csv };
    for (variant, result) in results {
        let result = result?;
        match variant {
            Variant::Rmtr => outcome.rmtr = Some(result),
            Variant::Mastr => outcome.mastr = Some(result),
        }
    }
    write_trace_csv(
        &outcome.csv,
        outcome.mastr.as_ref().map(|r| r.trace.as_slice()),
        outcome.rmtr.as_ref().map(|r| r.trace.as_slice()),
    )?;
    Ok(outcome)
}
