//! Grid transfer operators between consecutive levels.
//!
//! Prolongation uses bilinear (Q1) nodal interpolation. Restriction is its
//! exact transpose and projection is injection at coincident nodes. The
//! truncated prolongation removes every row that belongs to an active fine
//! unknown, so coarse corrections never touch those components.

use crate::error::{Error, Result};
use crate::grid::Hierarchy;
use crate::scalar::Scalar;
pub use crate::sparse::SparseMatrix;

/// Prolongation from `coarse_level` to `coarse_level + 1`.
///
/// Stencil weights that point at Dirichlet coarse nodes are dropped, so row
/// sums fall below one next to a Dirichlet boundary.
pub fn assemble_prolongation<T: Scalar>(hier: &Hierarchy, coarse_level: usize) -> Result<SparseMatrix<T>> {
    if coarse_level + 1 >= hier.num_levels() {
        return Err(Error::OutOfRange { index: coarse_level, size: hier.num_levels() - 1 });
    }
    let (cmesh, cdofs) = (hier.mesh(coarse_level), hier.dofs(coarse_level));
    let (fmesh, fdofs) = (hier.mesh(coarse_level + 1), hier.dofs(coarse_level + 1));
    let half = T::lit(0.5);
    let mut triplets = Vec::with_capacity(4 * fdofs.n_dofs());
    for (p, &node) in fdofs.nodes().iter().enumerate() {
        let (i, j) = fmesh.node_ij(node)?;
        let xs: &[(usize, T)] =
            &if i % 2 == 0 { vec![(i / 2, T::one())] } else { vec![(i / 2, half), (i / 2 + 1, half)] };
        let ys: &[(usize, T)] =
            &if j % 2 == 0 { vec![(j / 2, T::one())] } else { vec![(j / 2, half), (j / 2 + 1, half)] };
        for &(ci, wx) in xs {
            for &(cj, wy) in ys {
                if let Some(k) = cdofs.dof(cmesh.node_index(ci, cj)) {
                    triplets.push((p, k, wx * wy));
                }
            }
        }
    }
    SparseMatrix::from_triplets(fdofs.n_dofs(), cdofs.n_dofs(), &triplets)
}

/// Restriction `R = I^T`.
pub fn restriction<T: Scalar>(prolongation: &SparseMatrix<T>) -> SparseMatrix<T> {
    prolongation.transpose()
}

/// Injection from `fine_level` to `fine_level - 1`: each coarse unknown reads
/// the fine unknown at the coincident node.
pub fn assemble_projection<T: Scalar>(hier: &Hierarchy, fine_level: usize) -> Result<SparseMatrix<T>> {
    if fine_level == 0 || fine_level >= hier.num_levels() {
        return Err(Error::OutOfRange { index: fine_level, size: hier.num_levels() });
    }
    let (cmesh, cdofs) = (hier.mesh(fine_level - 1), hier.dofs(fine_level - 1));
    let (fmesh, fdofs) = (hier.mesh(fine_level), hier.dofs(fine_level));
    let mut triplets = Vec::with_capacity(cdofs.n_dofs());
    for (k, &node) in cdofs.nodes().iter().enumerate() {
        let (i, j) = cmesh.node_ij(node)?;
        let p = fdofs.dof(fmesh.node_index(2 * i, 2 * j)).expect("coarse free node coincides with a fine free node");
        triplets.push((k, p, T::one()));
    }
    SparseMatrix::from_triplets(cdofs.n_dofs(), fdofs.n_dofs(), &triplets)
}

/// Removes rows `p` for all `p` in `active_fine`; other rows are copied bit for bit.
pub fn truncate<T: Scalar>(prolongation: &SparseMatrix<T>, active_fine: &[usize]) -> Result<SparseMatrix<T>> {
    let mut drop = vec![false; prolongation.rows()];
    for &p in active_fine {
        if p >= drop.len() {
            return Err(Error::OutOfRange { index: p, size: drop.len() });
        }
        drop[p] = true;
    }
    Ok(prolongation.without_rows(&drop))
}

/// Galerkin product `I^T H I`.
pub fn galerkin_hessian<T: Scalar>(
    prolongation: &SparseMatrix<T>,
    hessian: &SparseMatrix<T>,
) -> Result<SparseMatrix<T>> {
    if hessian.rows() != hessian.cols() {
        return Err(Error::DimensionMismatch { expected: hessian.rows(), got: hessian.cols() });
    }
    if hessian.cols() != prolongation.rows() {
        return Err(Error::DimensionMismatch { expected: prolongation.rows(), got: hessian.cols() });
    }
    let hi = hessian.matmul(prolongation)?;
    prolongation.transpose().matmul(&hi)
}

/// `I^T v`.
pub fn restrict_vector<T: Scalar>(prolongation: &SparseMatrix<T>, v: &[T]) -> Result<Vec<T>> {
    prolongation.transpose_mul_vec(v)
}

/// Fine unknowns where coarse basis function `k` is nonzero.
pub fn column_support<T: Scalar>(prolongation: &SparseMatrix<T>, k: usize) -> Result<Vec<usize>> {
    if k >= prolongation.cols() {
        return Err(Error::OutOfRange { index: k, size: prolongation.cols() });
    }
    Ok((0..prolongation.rows()).filter(|&p| prolongation.get(p, k) != T::zero()).collect())
}

/// Column supports of every coarse unknown at once (rows of the transpose).
pub fn column_supports<T: Scalar>(prolongation: &SparseMatrix<T>) -> Vec<Vec<usize>> {
    let t = prolongation.transpose();
    (0..t.rows())
        .map(|k| {
            let (cols, vals) = t.row(k);
            cols.iter().zip(vals).filter(|(_, &v)| v != T::zero()).map(|(&p, _)| p).collect()
        })
        .collect()
}
