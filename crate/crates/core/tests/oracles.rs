//! Independent dense re-derivations of the assembled operators.

use mastr::problems::{assemble_stiffness, lumped_mass};
use mastr::transfer::{assemble_prolongation, galerkin_hessian};
use mastr::trstep::solve_subproblem_cd;
use mastr::{
    BoxBounds64, DirichletSet, Hierarchy, Objective, Problem64, ProblemKind, QuadraticModel64, SparseMatrix64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense consistent stiffness and mass over all nodes of the finest mesh,
/// integrated with 2x2 Gauss quadrature on the reference bilinear element.
fn dense_q1(hier: &Hierarchy) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mesh = hier.mesh(hier.finest());
    let (n, h) = (mesh.cells_per_side, mesh.h());
    let nn = mesh.node_count();
    let mut k = vec![vec![0.0; nn]; nn];
    let mut m = vec![vec![0.0; nn]; nn];
    let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
    let corners = [(0, 0), (1, 0), (0, 1), (1, 1)];
    // phi_(a,b)(u, v) on the unit square and its gradient in (u, v).
    let phi = |a: usize, b: usize, u: f64, v: f64| {
        let fu = if a == 0 { 1.0 - u } else { u };
        let fv = if b == 0 { 1.0 - v } else { v };
        let du = if a == 0 { -1.0 } else { 1.0 };
        let dv = if b == 0 { -1.0 } else { 1.0 };
        (fu * fv, du * fv, fu * dv)
    };
    for cj in 0..n {
        for ci in 0..n {
            for &u in &gauss {
                for &v in &gauss {
                    let w = 0.25 * h * h;
                    for &(a1, b1) in &corners {
                        for &(a2, b2) in &corners {
                            let (p1, gx1, gy1) = phi(a1, b1, u, v);
                            let (p2, gx2, gy2) = phi(a2, b2, u, v);
                            let r = mesh.node_index(ci + a1, cj + b1);
                            let c = mesh.node_index(ci + a2, cj + b2);
                            k[r][c] += w * (gx1 * gx2 + gy1 * gy2) / (h * h);
                            m[r][c] += w * p1 * p2;
                        }
                    }
                }
            }
        }
    }
    (k, m)
}

#[test]
fn stiffness_matches_quadrature_assembly() {
    for dirichlet in [DirichletSet::LEFT, DirichletSet::ALL, DirichletSet::NONE] {
        let hier = Hierarchy::build(2, 2, dirichlet).unwrap();
        let (k, _) = dense_q1(&hier);
        let dofs = hier.dofs(hier.finest());
        let assembled = assemble_stiffness::<f64>(&hier, hier.finest()).unwrap().to_dense();
        for (p, &np) in dofs.nodes().iter().enumerate() {
            for (q, &nq) in dofs.nodes().iter().enumerate() {
                assert!((assembled[p][q] - k[np][nq]).abs() < 1e-14, "{dirichlet:?} ({p},{q})");
            }
        }
    }
}

#[test]
fn stiffness_applied_to_a_parabola() {
    let hier = Hierarchy::build(2, 2, DirichletSet::ALL).unwrap();
    let (k, _) = dense_q1(&hier);
    let (mesh, dofs) = (hier.mesh(1), hier.dofs(1));
    let sample = |node: usize| {
        let (x1, _) = mesh.node_coord(node).unwrap();
        x1 * (1.0 - x1)
    };
    let x: Vec<f64> = dofs.nodes().iter().map(|&nd| sample(nd)).collect();
    let kx = assemble_stiffness::<f64>(&hier, 1).unwrap().mul_vec(&x).unwrap();
    for (p, &np) in dofs.nodes().iter().enumerate() {
        let dense: f64 = dofs.nodes().iter().enumerate().map(|(q, &nq)| k[np][nq] * x[q]).sum();
        assert!((kx[p] - dense).abs() < 1e-14);
    }
}

#[test]
fn lumped_mass_is_row_sum_of_consistent_mass() {
    let hier = Hierarchy::build(3, 2, DirichletSet::LEFT).unwrap();
    let (_, m) = dense_q1(&hier);
    let lumped = lumped_mass::<f64>(&hier, hier.finest()).unwrap();
    for (p, &node) in hier.dofs(hier.finest()).nodes().iter().enumerate() {
        let row: f64 = m[node].iter().sum();
        assert!((lumped[p] - row).abs() < 1e-15);
    }
}

#[test]
fn galerkin_identity_product_matches_dense() {
    let hier = Hierarchy::build(2, 4, DirichletSet::ALL).unwrap();
    let i = assemble_prolongation::<f64>(&hier, 0).unwrap();
    assert!(i.rows() <= 100);
    let got = galerkin_hessian(&i, &SparseMatrix64::identity(i.rows())).unwrap().to_dense();
    let d = i.to_dense();
    for a in 0..i.cols() {
        for b in 0..i.cols() {
            let want: f64 = (0..i.rows()).map(|r| d[r][a] * d[r][b]).sum();
            assert!((got[a][b] - want).abs() < 1e-15);
        }
    }
}

#[test]
fn morebv_value_at_zero_by_brute_force() {
    let p = Problem64::build(ProblemKind::Morebv, 2, 2).unwrap();
    let h = 0.25;
    let mut want = 0.0;
    for j in 1..4 {
        for i in 1..4 {
            let r = -0.5 * (i as f64 * h + j as f64 * h + 1.0).powi(3);
            want += h * h * r * r;
        }
    }
    let got = p.value(&vec![0.0; p.n_dofs()]).unwrap();
    assert!((got - want).abs() < 1e-13 * want, "{got} vs {want}");
}

/// Grid scan of the model over the step box with spacing `step`.
fn lattice_min(model: &QuadraticModel64, b: &BoxBounds64, step: f64) -> f64 {
    let n = b.len();
    let counts: Vec<usize> = (0..n).map(|i| ((b.ub[i] - b.lb[i]) / step).round() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut best = f64::INFINITY;
    let mut s = vec![0.0; n];
    for mut idx in 0..total {
        for i in 0..n {
            s[i] = b.lb[i] + (idx % counts[i]) as f64 * step;
            idx /= counts[i];
        }
        best = best.min(model.eval_step(&s));
    }
    best
}

#[test]
fn coordinate_descent_reaches_the_lattice_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..12 {
        let n = 1 + case % 3;
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut trip = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v: f64 = (0..n).map(|k| a[k][r] * a[k][c]).sum::<f64>() + if r == c { 0.2 } else { 0.0 };
                trip.push((r, c, v));
            }
        }
        let h = SparseMatrix64::from_triplets(n, n, &trip).unwrap();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let model = QuadraticModel64::new(vec![0.0; n], g, h, 0.0).unwrap();
        let lb: Vec<f64> = (0..n).map(|_| -(rng.gen_range(0..2) as f64)).collect();
        let ub: Vec<f64> = (0..n).map(|_| rng.gen_range(0..2) as f64).collect();
        let b = BoxBounds64::new(lb, ub).unwrap();
        let s = solve_subproblem_cd(&model, &b, 500).unwrap();
        assert!(b.max_violation(&s).0 == 0.0);
        let best = lattice_min(&model, &b, 1e-2);
        assert!(model.eval_step(&s) <= best + 1e-3, "case {case}: {} vs {best}", model.eval_step(&s));
    }
}

#[test]
fn gradients_at_start_match_central_differences() {
    for kind in ProblemKind::ALL {
        let p = Problem64::build(kind, 2, 4).unwrap();
        let x = p.x0().to_vec();
        let g = p.gradient(&x).unwrap();
        let mut xp = x.clone();
        let mut err = 0.0;
        for i in 0..x.len() {
            let h = 1e-6 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let fp = p.value(&xp).unwrap();
            xp[i] = x[i] - h;
            let fm = p.value(&xp).unwrap();
            xp[i] = x[i];
            err += (g[i] - (fp - fm) / (2.0 * h)).powi(2);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        assert!(err.sqrt() / norm < 1e-6, "{kind}: {}", err.sqrt() / norm);
    }
}
