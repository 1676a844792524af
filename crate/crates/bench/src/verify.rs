//! Sampled property checks on live solves plus finite-difference checks of
//! the benchmark derivatives.

use std::fmt;

use mastr::{BoxBounds64, LevelState, Objective, Problem64, SolveObserver, SparseMatrix64, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::run::solve_variant;
use crate::Result;

/// Feasibility, admissibility and TR-containment threshold.
pub const FEASIBILITY_TOL: f64 = 1e-12;
pub const FD_GRADIENT_TOL: f64 = 1e-5;
pub const FD_HESSIAN_TOL: f64 = 1e-4;
/// Relative tolerance for "equal to machine precision".
pub const GALERKIN_TOL: f64 = 1e-12;
/// Stand-in for an infinite coarse bound when sampling.
const INFINITE_BOUND: f64 = 1e3;
/// V-cycles observed per solve by [`verify`].
pub const VERIFY_CYCLES: usize = 10;
/// Largest level count used for the finite-difference checks.
pub const FD_LEVELS: usize = 3;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Samples coarse points `z` in `coarse_box` (infinite sides replaced by
/// `x0 -/+ 1e3`) and checks the prolongated trial `x_f + I (z - x0)` against
/// `fine_bounds`, and `|I (z - x0)|_inf` against `delta` when given.
///
/// The first two samples are the lower and upper vertices, then random
/// vertices alternate with uniform interior points. Returns the worst fine
/// violation and the worst excess over `delta`.
#[allow(clippy::too_many_arguments)]
pub fn sample_admissibility(
    prolongation: &SparseMatrix64,
    fine_x: &[f64],
    fine_bounds: &BoxBounds64,
    coarse_x0: &[f64],
    coarse_box: &BoxBounds64,
    delta: Option<f64>,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> mastr::Result<(f64, f64)> {
    let n = coarse_x0.len();
    let lo: Vec<f64> = (0..n)
        .map(|k| if coarse_box.lb[k].is_finite() { coarse_box.lb[k] } else { coarse_x0[k] - INFINITE_BOUND })
        .collect();
    let hi: Vec<f64> = (0..n)
        .map(|k| if coarse_box.ub[k].is_finite() { coarse_box.ub[k] } else { coarse_x0[k] + INFINITE_BOUND })
        .collect();
    let (mut worst_viol, mut worst_excess) = (0.0f64, 0.0f64);
    let mut step = vec![0.0; n];
    for sample in 0..samples {
        for k in 0..n {
            let z = match sample {
                0 => lo[k],
                1 => hi[k],
                s if s % 2 == 0 => {
                    if rng.gen_bool(0.5) {
                        lo[k]
                    } else {
                        hi[k]
                    }
                }
                _ => lo[k] + rng.gen::<f64>() * (hi[k] - lo[k]),
            };
            step[k] = z.clamp(lo[k], hi[k]) - coarse_x0[k];
        }
        let fine_step = prolongation.mul_vec(&step)?;
        let trial: Vec<f64> = fine_x.iter().zip(&fine_step).map(|(a, b)| a + b).collect();
        worst_viol = worst_viol.max(fine_bounds.max_violation(&trial).0);
        if let Some(d) = delta {
            worst_excess = worst_excess.max(inf_norm(&fine_step) - d);
        }
    }
    Ok((worst_viol, worst_excess))
}

#[derive(Debug, Clone, Default)]
pub struct MonitorStats {
    pub iterates: usize,
    /// Worst bound violation over every recorded iterate on every level.
    pub max_infeasibility: f64,
    pub descents: usize,
    pub samples: usize,
    pub max_trial_violation: f64,
    pub max_tr_excess: f64,
    pub corrections: usize,
    /// Active components checked by the freeze test.
    pub frozen_checked: usize,
    pub max_frozen_correction: f64,
    pub max_galerkin_gradient: f64,
    pub max_galerkin_asymmetry: f64,
    /// Finest-level objective after each finest-level update (accepted or not).
    pub finest_values: Vec<f64>,
    /// Largest increase between consecutive entries of `finest_values`.
    pub max_increase: f64,
    /// `max_increase` relative to `max(1, |f|)`.
    pub max_relative_increase: f64,
    /// Largest increase measured with the objective's own difference
    /// formula, which does not cancel when consecutive values are close.
    pub max_direct_increase: f64,
}

/// Observer that records the invariants of a solve.
pub struct Monitor<'a> {
    problem: &'a Problem64,
    rng: ChaCha8Rng,
    samples: usize,
    pub stats: MonitorStats,
    error: Option<mastr::Error>,
    last_finest: Option<Vec<f64>>,
}

impl<'a> Monitor<'a> {
    /// `samples` coarse points are drawn at every descent.
    pub fn new(problem: &'a Problem64, seed: u64, samples: usize) -> Self {
        Self {
            problem,
            rng: ChaCha8Rng::seed_from_u64(seed),
            samples,
            stats: MonitorStats::default(),
            error: None,
            last_finest: None,
        }
    }

    /// First evaluation error hit inside a callback, if any.
    pub fn error(&self) -> Option<&mastr::Error> {
        self.error.as_ref()
    }

    fn finest_update(&mut self, x: &[f64]) -> mastr::Result<()> {
        let f = self.problem.value(x)?;
        if let Some(&prev) = self.stats.finest_values.last() {
            let s = &mut self.stats;
            s.max_increase = s.max_increase.max(f - prev);
            s.max_relative_increase = s.max_relative_increase.max((f - prev) / prev.abs().max(1.0));
        }
        if let Some(old) = &self.last_finest {
            let step: Vec<f64> = x.iter().zip(old).map(|(a, b)| a - b).collect();
            let direct = -self.problem.decrease(old, &step)?;
            self.stats.max_direct_increase = self.stats.max_direct_increase.max(direct);
        }
        self.stats.finest_values.push(f);
        self.last_finest = Some(x.to_vec());
        Ok(())
    }

    fn descent(&mut self, fine: &LevelState<f64>, coarse: &LevelState<f64>, g: &[f64]) -> mastr::Result<()> {
        let op = coarse.prolongation.as_ref().expect("coarse level carries its prolongation");
        let model = coarse.model.as_ref().expect("coarse level carries its model");
        self.stats.descents += 1;
        for (coarse_box, delta) in [(&coarse.bounds_f, Some(coarse.delta)), (&coarse.bounds_l, None)] {
            let (viol, excess) = sample_admissibility(
                op,
                &fine.x,
                &fine.bounds_f,
                &coarse.x0,
                coarse_box,
                delta,
                self.samples,
                &mut self.rng,
            )?;
            self.stats.samples += self.samples;
            self.stats.max_trial_violation = self.stats.max_trial_violation.max(viol);
            self.stats.max_tr_excess = self.stats.max_tr_excess.max(excess);
        }

        let restricted = op.transpose_mul_vec(g)?;
        let model_g = model.gradient(&coarse.x0)?;
        let diff: Vec<f64> = restricted.iter().zip(&model_g).map(|(a, b)| a - b).collect();
        let rel = inf_norm(&diff) / inf_norm(&restricted).max(1.0);
        self.stats.max_galerkin_gradient = self.stats.max_galerkin_gradient.max(rel);
        let scale = model.h.triplets().iter().fold(1.0f64, |m, t| m.max(t.2.abs()));
        self.stats.max_galerkin_asymmetry = self.stats.max_galerkin_asymmetry.max(model.h.symmetry_defect() / scale);
        Ok(())
    }
}

impl SolveObserver<f64> for Monitor<'_> {
    fn on_iterate(&mut self, level: usize, x: &[f64], bounds: &BoxBounds64) {
        self.stats.iterates += 1;
        self.stats.max_infeasibility = self.stats.max_infeasibility.max(bounds.max_violation(x).0);
        if level == self.problem.hierarchy().finest() {
            if let Err(e) = self.finest_update(x) {
                self.error.get_or_insert(e);
            }
        }
    }

    fn on_descent(&mut self, fine: &LevelState<f64>, coarse: &LevelState<f64>, g: &[f64]) {
        if let Err(e) = self.descent(fine, coarse, g) {
            self.error.get_or_insert(e);
        }
    }

    fn on_correction(&mut self, _level: usize, active: &[usize], correction: &[f64]) {
        self.stats.corrections += 1;
        self.stats.frozen_checked += active.len();
        for &p in active {
            self.stats.max_frozen_correction = self.stats.max_frozen_correction.max(correction[p].abs());
        }
    }
}

/// Uniform point of `[max(lb, x0 - 1), min(ub, x0 + 1)]`.
pub fn random_feasible_point(problem: &Problem64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let b = problem.bounds();
    problem
        .x0()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let lo = b.lb[i].max(c - 1.0);
            let hi = b.ub[i].min(c + 1.0);
            lo + rng.gen::<f64>() * (hi - lo)
        })
        .collect()
}

/// `|g - g_fd| / max(1, |g|)` with central differences, step `1e-6 max(1, |x_i|)`.
pub fn fd_gradient_error<O: Objective<f64> + ?Sized>(objective: &O, x: &[f64]) -> Result<f64> {
    let g = objective.gradient(x)?;
    let mut xp = x.to_vec();
    let mut diff = 0.0;
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = objective.value(&xp)?;
        xp[i] = x[i] - h;
        let fm = objective.value(&xp)?;
        xp[i] = x[i];
        let d = g[i] - (fp - fm) / (2.0 * h);
        diff += d * d;
    }
    Ok(diff.sqrt() / norm2(&g).max(1.0))
}

/// `|H v - (g(x + t v) - g(x - t v)) / 2t| / max(1, |H v|)`.
pub fn fd_hessian_error<O: Objective<f64> + ?Sized>(objective: &O, x: &[f64], v: &[f64]) -> Result<f64> {
    let hv = objective.hessian(x)?.mul_vec(v)?;
    let t = 1e-6 * inf_norm(x).max(1.0) / inf_norm(v).max(f64::MIN_POSITIVE);
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - t * b).collect();
    let (gp, gm) = (objective.gradient(&xp)?, objective.gradient(&xm)?);
    let diff: Vec<f64> = (0..x.len()).map(|i| hv[i] - (gp[i] - gm[i]) / (2.0 * t)).collect();
    Ok(norm2(&diff) / norm2(&hv).max(1.0))
}

/// Worst gradient and Hessian-vector errors over `points` random feasible points.
pub fn fd_suite(problem: &Problem64, points: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let (mut eg, mut eh) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let x = random_feasible_point(problem, rng);
        let v: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        eg = eg.max(fd_gradient_error(problem, &x)?);
        eh = eh.max(fd_hessian_error(problem, &x, &v)?);
    }
    Ok((eg, eh))
}

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: String,
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl PropertyResult {
    /// Passes when `worst <= threshold` (so a zero threshold demands exact zeros).
    pub fn at_most(name: impl Into<String>, worst: f64, threshold: f64) -> Self {
        Self { name: name.into(), worst, threshold, passed: worst <= threshold }
    }

    /// Passes when `worst < threshold`.
    pub fn below(name: impl Into<String>, worst: f64, threshold: f64) -> Self {
        Self { name: name.into(), worst, threshold, passed: worst < threshold }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub properties: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            let verdict = if p.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict} {:<36} worst {:.3e} (limit {:.0e})", p.name, p.worst, p.threshold)?;
        }
        Ok(())
    }
}

/// Runs the property suites on the configured problem (all three when none
/// is set) with both variants, observing the first
/// `min(max_vcycles, VERIFY_CYCLES)` V-cycles of each solve.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.solve.max_vcycles = cfg.solve.max_vcycles.min(VERIFY_CYCLES);
    let mut report = VerifyReport::default();
    for kind in cfg.problems() {
        let problem = Problem64::build(kind, cfg.levels, cfg.coarse_cells)?;
        for variant in [Variant::Rmtr, Variant::Mastr] {
            let mut monitor = Monitor::new(&problem, cfg.seed, 100);
            solve_variant(&problem, variant, &cfg, &mut monitor)?;
            if let Some(e) = monitor.error() {
                return Err(e.clone().into());
            }
            let s = &monitor.stats;
            let tag = format!("{kind}/{variant}");
            report.properties.extend([
                PropertyResult::at_most(format!("{tag} feasibility"), s.max_infeasibility, FEASIBILITY_TOL),
                PropertyResult::at_most(format!("{tag} admissibility"), s.max_trial_violation, FEASIBILITY_TOL),
                PropertyResult::at_most(format!("{tag} tr-containment"), s.max_tr_excess, FEASIBILITY_TOL),
                PropertyResult::at_most(format!("{tag} freeze"), s.max_frozen_correction, 0.0),
                PropertyResult::at_most(format!("{tag} galerkin-gradient"), s.max_galerkin_gradient, GALERKIN_TOL),
                PropertyResult::at_most(format!("{tag} galerkin-symmetry"), s.max_galerkin_asymmetry, GALERKIN_TOL),
            ]);
        }
        let small = Problem64::build(kind, cfg.levels.min(FD_LEVELS), cfg.coarse_cells)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (eg, eh) = fd_suite(&small, 5, &mut rng)?;
        report.properties.push(PropertyResult::below(format!("{kind} fd-gradient"), eg, FD_GRADIENT_TOL));
        report.properties.push(PropertyResult::below(format!("{kind} fd-hessian"), eh, FD_HESSIAN_TOL));
    }
    Ok(report)
}
