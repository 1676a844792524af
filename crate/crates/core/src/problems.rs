//! Benchmark obstacle-type problems on the unit square.
//!
//! * `membrane`: `1/2 |grad u|^2 + u` with `u = 0` on the left edge and a
//!   circular lower bound on the right edge.
//! * `ignition`: `1/2 |grad u|^2 - (u e^u - e^u) - f u` with a paraboloid
//!   lower bound and a constant upper bound, `u = 0` on the whole boundary.
//! * `morebv`: squared residual of `Delta u - 0.5 (u + x1 + x2 + 1)^3`
//!   (finite-difference collocation) above an oscillating lower bound.
//!
//! Integrals of nonlinear terms and loads use nodal (lumped-mass) quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::grid::{DirichletSet, Hierarchy};
use crate::objective::{check_input, Objective};
use crate::scalar::{clamp, dot, Scalar};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Membrane,
    Ignition,
    Morebv,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::Membrane, ProblemKind::Ignition, ProblemKind::Morebv];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Membrane => "membrane",
            ProblemKind::Ignition => "ignition",
            ProblemKind::Morebv => "morebv",
        }
    }

    /// Boundary parts carrying `u = 0` for this problem.
    pub fn dirichlet(&self) -> DirichletSet {
        match self {
            ProblemKind::Membrane => DirichletSet::LEFT,
            ProblemKind::Ignition | ProblemKind::Morebv => DirichletSet::ALL,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "membrane" => Ok(ProblemKind::Membrane),
            "ignition" => Ok(ProblemKind::Ignition),
            "morebv" => Ok(ProblemKind::Morebv),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }
}

/// A discretized benchmark on the finest level of its hierarchy.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    kind: ProblemKind,
    hierarchy: Hierarchy,
    stiffness: SparseMatrix<T>,
    mass: Vec<T>,
    /// Linear term `b` of the objective.
    load: Vec<T>,
    bounds: BoxBounds<T>,
    x0: Vec<T>,
    /// 5-point Laplacian (morebv only).
    laplacian: Option<SparseMatrix<T>>,
    /// `x1 + x2 + 1` per unknown (morebv only).
    shift: Vec<T>,
}

/// Q1 stiffness matrix of `int grad u . grad v` on `level`, Dirichlet rows
/// and columns eliminated.
pub fn assemble_stiffness<T: Scalar>(hier: &Hierarchy, level: usize) -> Result<SparseMatrix<T>> {
    hier.check_level(level)?;
    let (mesh, dofs) = (hier.mesh(level), hier.dofs(level));
    // Element matrix on a square cell, local order (0,0), (1,0), (0,1), (1,1).
    let diag = T::lit(2.0 / 3.0);
    let edge = T::lit(-1.0 / 6.0);
    let opposite = T::lit(-1.0 / 3.0);
    let n = mesh.cells_per_side;
    let mut triplets = Vec::with_capacity(16 * n * n);
    for cj in 0..n {
        for ci in 0..n {
            let local = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)];
            let ids = local.map(|(i, j)| dofs.dof(mesh.node_index(i, j)));
            for (a, &ia) in ids.iter().enumerate() {
                let Some(ra) = ia else { continue };
                for (b, &ib) in ids.iter().enumerate() {
                    let Some(rb) = ib else { continue };
                    let v = if a == b {
                        diag
                    } else if a + b == 3 {
                        opposite
                    } else {
                        edge
                    };
                    triplets.push((ra, rb, v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(dofs.n_dofs(), dofs.n_dofs(), &triplets)
}

/// Nodal quadrature weights: each cell contributes `h^2 / 4` to its corners.
pub fn lumped_mass<T: Scalar>(hier: &Hierarchy, level: usize) -> Result<Vec<T>> {
    hier.check_level(level)?;
    let (mesh, dofs) = (hier.mesh(level), hier.dofs(level));
    let quarter = T::lit(mesh.h() * mesh.h() / 4.0);
    let mut mass = vec![T::zero(); dofs.n_dofs()];
    let n = mesh.cells_per_side;
    for cj in 0..n {
        for ci in 0..n {
            for (i, j) in [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)] {
                if let Some(d) = dofs.dof(mesh.node_index(i, j)) {
                    mass[d] = mass[d] + quarter;
                }
            }
        }
    }
    Ok(mass)
}

fn five_point_laplacian<T: Scalar>(hier: &Hierarchy, level: usize) -> Result<SparseMatrix<T>> {
    let (mesh, dofs) = (hier.mesh(level), hier.dofs(level));
    let inv_h2 = T::lit(1.0 / (mesh.h() * mesh.h()));
    let mut triplets = Vec::with_capacity(5 * dofs.n_dofs());
    for (k, &node) in dofs.nodes().iter().enumerate() {
        let (i, j) = mesh.node_ij(node)?;
        triplets.push((k, k, T::lit(-4.0) * inv_h2));
        for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
            if let Some(d) = dofs.dof(mesh.node_index(ni, nj)) {
                triplets.push((k, d, inv_h2));
            }
        }
    }
    SparseMatrix::from_triplets(dofs.n_dofs(), dofs.n_dofs(), &triplets)
}

/// Lower bound of the membrane on the right edge: upper half of the circle of
/// radius 1 centred at `(y, u) = (-0.5, -1.3)`; unconstrained where undefined.
pub fn membrane_lower_bound(x1: f64, x2: f64) -> f64 {
    let arg = 1.0 - (x2 + 0.5) * (x2 + 0.5);
    if x1 == 1.0 && arg >= 0.0 {
        -1.3 + arg.sqrt()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn ignition_lower_bound(x1: f64, x2: f64) -> f64 {
    -8.0 * (x1 - 7.0 / 16.0).powi(2) - 8.0 * (x2 - 7.0 / 16.0).powi(2) + 0.2
}

pub fn ignition_rhs(x1: f64, x2: f64) -> f64 {
    let c = x1 * x1 - x1 * x1 * x1;
    (9.0 * PI * PI + (c * (3.0 * PI * x2).sin()).exp() * c + 6.0 * x1 - 2.0) * (3.0 * PI * x1).sin()
}

pub fn morebv_lower_bound(x1: f64, x2: f64) -> f64 {
    (5.0 * PI * x1).sin() * (PI * x2).sin() * (PI * (1.0 - x1)).sin() * (PI * (1.0 - x2)).sin()
}

impl<T: Scalar> Problem<T> {
    /// Builds the hierarchy with the problem's Dirichlet set and discretizes on its finest level.
    pub fn build(kind: ProblemKind, levels: usize, coarse_cells: usize) -> Result<Self> {
        let hier = Hierarchy::build(levels, coarse_cells, kind.dirichlet())?;
        match kind {
            ProblemKind::Membrane => Self::membrane(hier),
            ProblemKind::Ignition => Self::ignition(hier),
            ProblemKind::Morebv => Self::morebv(hier),
        }
    }

    pub fn membrane(hier: Hierarchy) -> Result<Self> {
        if hier.dirichlet() != DirichletSet::LEFT {
            return Err(Error::WrongDirichlet { problem: "membrane", expected: "{GammaL}" });
        }
        let mass = lumped_mass(&hier, hier.finest())?;
        let lb = Self::sample(&hier, membrane_lower_bound);
        let ub = vec![T::infinity(); lb.len()];
        Self::finish(ProblemKind::Membrane, hier, mass.clone(), lb, ub, mass)
    }

    pub fn ignition(hier: Hierarchy) -> Result<Self> {
        if hier.dirichlet() != DirichletSet::ALL {
            return Err(Error::WrongDirichlet { problem: "ignition", expected: "{GammaL, GammaR, GammaF}" });
        }
        let mass: Vec<T> = lumped_mass(&hier, hier.finest())?;
        let rhs: Vec<T> = Self::sample(&hier, ignition_rhs);
        let load = mass.iter().zip(&rhs).map(|(&m, &f)| -m * f).collect();
        let lb = Self::sample(&hier, ignition_lower_bound);
        let ub = vec![T::lit(0.5); lb.len()];
        Self::finish(ProblemKind::Ignition, hier, load, lb, ub, mass)
    }

    pub fn morebv(hier: Hierarchy) -> Result<Self> {
        if hier.dirichlet() != DirichletSet::ALL {
            return Err(Error::WrongDirichlet { problem: "morebv", expected: "{GammaL, GammaR, GammaF}" });
        }
        let mass = lumped_mass(&hier, hier.finest())?;
        let lb = Self::sample(&hier, morebv_lower_bound);
        let ub = vec![T::infinity(); lb.len()];
        let load = vec![T::zero(); lb.len()];
        let mut p = Self::finish(ProblemKind::Morebv, hier, load, lb, ub, mass)?;
        p.laplacian = Some(five_point_laplacian(&p.hierarchy, p.hierarchy.finest())?);
        p.shift = Self::sample(&p.hierarchy, |x1, x2| x1 + x2 + 1.0);
        Ok(p)
    }

    fn sample(hier: &Hierarchy, f: impl Fn(f64, f64) -> f64) -> Vec<T> {
        hier.dof_coords(hier.finest()).into_iter().map(|(a, b)| T::lit(f(a, b))).collect()
    }

    fn finish(
        kind: ProblemKind,
        hierarchy: Hierarchy,
        load: Vec<T>,
        lb: Vec<T>,
        ub: Vec<T>,
        mass: Vec<T>,
    ) -> Result<Self> {
        let stiffness = assemble_stiffness(&hierarchy, hierarchy.finest())?;
        let bounds = BoxBounds::new(lb, ub)?;
        let x0 = (0..bounds.len()).map(|i| clamp(T::zero(), bounds.lb[i], bounds.ub[i])).collect();
        Ok(Self { kind, hierarchy, stiffness, mass, load, bounds, x0, laplacian: None, shift: Vec::new() })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn stiffness(&self) -> &SparseMatrix<T> {
        &self.stiffness
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn load(&self) -> &[T] {
        &self.load
    }

    pub fn bounds(&self) -> &BoxBounds<T> {
        &self.bounds
    }

    pub fn x0(&self) -> &[T] {
        &self.x0
    }

    pub fn n_dofs(&self) -> usize {
        self.x0.len()
    }

    fn h2(&self) -> T {
        let h = self.hierarchy.mesh(self.hierarchy.finest()).h();
        T::lit(h * h)
    }

    /// Residual `L x - 0.5 a^3` and `a = x + x1 + x2 + 1` of the morebv collocation.
    fn morebv_residual(&self, x: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let lap = self.laplacian.as_ref().expect("morebv laplacian");
        let a: Vec<T> = x.iter().zip(&self.shift).map(|(&u, &c)| u + c).collect();
        let half = T::lit(0.5);
        let r = lap.mul_vec(x)?.into_iter().zip(&a).map(|(l, &ak)| l - half * ak * ak * ak).collect();
        Ok((r, a))
    }
}

/// `(x - 1) e^x`, the antiderivative of `x e^x`.
fn ignition_phi<T: Scalar>(x: T) -> T {
    (x - T::one()) * x.exp()
}

impl<T: Scalar> Objective<T> for Problem<T> {
    fn dim(&self) -> usize {
        self.n_dofs()
    }

    fn value(&self, x: &[T]) -> Result<T> {
        check_input(x, self.n_dofs())?;
        let half = T::lit(0.5);
        Ok(match self.kind {
            ProblemKind::Membrane => half * dot(x, &self.stiffness.mul_vec(x)?) + dot(&self.load, x),
            ProblemKind::Ignition => {
                let nonlinear = self.mass.iter().zip(x).fold(T::zero(), |acc, (&m, &u)| acc + m * ignition_phi(u));
                half * dot(x, &self.stiffness.mul_vec(x)?) + dot(&self.load, x) - nonlinear
            }
            ProblemKind::Morebv => {
                let (r, _) = self.morebv_residual(x)?;
                self.h2() * dot(&r, &r)
            }
        })
    }

    fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        check_input(x, self.n_dofs())?;
        Ok(match self.kind {
            ProblemKind::Membrane => {
                self.stiffness.mul_vec(x)?.into_iter().zip(&self.load).map(|(kx, &b)| kx + b).collect()
            }
            ProblemKind::Ignition => {
                let kx = self.stiffness.mul_vec(x)?;
                (0..x.len()).map(|k| kx[k] + self.load[k] - self.mass[k] * x[k] * x[k].exp()).collect()
            }
            ProblemKind::Morebv => {
                let (r, a) = self.morebv_residual(x)?;
                let lap = self.laplacian.as_ref().expect("morebv laplacian");
                let lr = lap.transpose_mul_vec(&r)?;
                let two_h2 = T::lit(2.0) * self.h2();
                let c = T::lit(1.5);
                (0..x.len()).map(|k| two_h2 * (lr[k] - c * a[k] * a[k] * r[k])).collect()
            }
        })
    }

    fn hessian(&self, x: &[T]) -> Result<SparseMatrix<T>> {
        check_input(x, self.n_dofs())?;
        match self.kind {
            ProblemKind::Membrane => Ok(self.stiffness.clone()),
            ProblemKind::Ignition => {
                let d: Vec<T> = (0..x.len()).map(|k| -self.mass[k] * (T::one() + x[k]) * x[k].exp()).collect();
                self.stiffness.add_diagonal(&d)
            }
            ProblemKind::Morebv => {
                let (r, a) = self.morebv_residual(x)?;
                let lap = self.laplacian.as_ref().expect("morebv laplacian");
                let c = T::lit(1.5);
                let jd: Vec<T> = a.iter().map(|&ak| -c * ak * ak).collect();
                let jac = lap.add_diagonal(&jd)?;
                let jtj = jac.transpose().matmul(&jac)?;
                let three = T::lit(3.0);
                let second: Vec<T> = (0..x.len()).map(|k| -three * r[k] * a[k]).collect();
                Ok(jtj.add_diagonal(&second)?.scale(T::lit(2.0) * self.h2()))
            }
        }
    }

    fn decrease(&self, x: &[T], s: &[T]) -> Result<T> {
        check_input(x, self.n_dofs())?;
        check_input(s, self.n_dofs())?;
        let half = T::lit(0.5);
        Ok(match self.kind {
            ProblemKind::Membrane | ProblemKind::Ignition => {
                // f(x+s) - f(x) = (Kx + b).s + s.Ks/2 - sum m (phi(x+s) - phi(x))
                let kx = self.stiffness.mul_vec(x)?;
                let ks = self.stiffness.mul_vec(s)?;
                let mut change = T::zero();
                for k in 0..x.len() {
                    change = change + (kx[k] + self.load[k] + half * ks[k]) * s[k];
                }
                if self.kind == ProblemKind::Ignition {
                    for k in 0..x.len() {
                        let (u, d) = (x[k], s[k]);
                        let dphi = u.exp() * ((u - T::one()) * d.exp_m1() + d * d.exp());
                        change = change - self.mass[k] * dphi;
                    }
                }
                -change
            }
            ProblemKind::Morebv => {
                // r(x+s) - r(x) = L s - 0.5 s (3a^2 + 3as + s^2)
                let (r, a) = self.morebv_residual(x)?;
                let ls = self.laplacian.as_ref().expect("morebv laplacian").mul_vec(s)?;
                let three = T::lit(3.0);
                let mut change = T::zero();
                for k in 0..x.len() {
                    let (ak, sk) = (a[k], s[k]);
                    let dr = ls[k] - half * sk * (three * ak * ak + three * ak * sk + sk * sk);
                    change = change + dr * (r[k] + r[k] + dr);
                }
                -self.h2() * change
            }
        })
    }
}
