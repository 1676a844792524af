//! Nested uniform quadrilateral meshes on the unit square.
//!
//! Nodes are numbered row-major with `x1` varying fastest, so node `(i, j)`
//! (column `i`, row `j`) has index `i + j * (cells + 1)` and sits at
//! `(i * h, j * h)`. Levels are indexed from `0` (coarsest) to `L - 1`
//! (finest); each level doubles the number of cells per side.

use crate::error::{Error, Result};

/// Boundary part a mesh node belongs to.
///
/// Corners on `x1 = 0` are owned by [`BoundaryTag::GammaL`], corners on
/// `x1 = 1` by [`BoundaryTag::GammaR`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    /// `{0} x [0, 1]`
    GammaL,
    /// `{1} x [0, 1]`
    GammaR,
    /// `[0, 1] x {0, 1}` without the corners.
    GammaF,
}

/// Set of boundary parts carrying homogeneous Dirichlet conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DirichletSet {
    left: bool,
    right: bool,
    far: bool,
}

impl DirichletSet {
    pub const NONE: Self = Self { left: false, right: false, far: false };
    pub const LEFT: Self = Self { left: true, right: false, far: false };
    pub const ALL: Self = Self { left: true, right: true, far: true };

    pub fn from_tags(tags: &[BoundaryTag]) -> Self {
        let mut set = Self::NONE;
        for tag in tags {
            match tag {
                BoundaryTag::GammaL => set.left = true,
                BoundaryTag::GammaR => set.right = true,
                BoundaryTag::GammaF => set.far = true,
                BoundaryTag::Interior => {}
            }
        }
        set
    }

    pub fn contains(&self, tag: BoundaryTag) -> bool {
        match tag {
            BoundaryTag::Interior => false,
            BoundaryTag::GammaL => self.left,
            BoundaryTag::GammaR => self.right,
            BoundaryTag::GammaF => self.far,
        }
    }
}

/// One uniform mesh of the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshLevel {
    /// Position in the hierarchy, `0` is the coarsest level.
    pub index: usize,
    pub cells_per_side: usize,
}

impl MeshLevel {
    pub fn new(index: usize, cells_per_side: usize) -> Self {
        Self { index, cells_per_side }
    }

    /// Mesh width `1 / cells_per_side`.
    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_side as f64
    }

    pub fn nodes_per_side(&self) -> usize {
        self.cells_per_side + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side() * self.nodes_per_side()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + j * self.nodes_per_side()
    }

    /// Lattice position `(i, j)` of a node.
    pub fn node_ij(&self, node: usize) -> Result<(usize, usize)> {
        if node >= self.node_count() {
            return Err(Error::OutOfRange { index: node, size: self.node_count() });
        }
        let n = self.nodes_per_side();
        Ok((node % n, node / n))
    }

    pub fn node_coord(&self, node: usize) -> Result<(f64, f64)> {
        let (i, j) = self.node_ij(node)?;
        let c = self.cells_per_side as f64;
        Ok((i as f64 / c, j as f64 / c))
    }

    pub fn boundary_tag(&self, node: usize) -> Result<BoundaryTag> {
        let (i, j) = self.node_ij(node)?;
        let last = self.cells_per_side;
        Ok(if i == 0 {
            BoundaryTag::GammaL
        } else if i == last {
            BoundaryTag::GammaR
        } else if j == 0 || j == last {
            BoundaryTag::GammaF
        } else {
            BoundaryTag::Interior
        })
    }
}

/// Bijection between free (non-Dirichlet) nodes and unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    node_to_dof: Vec<Option<usize>>,
    dof_to_node: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &MeshLevel, dirichlet: DirichletSet) -> Self {
        let mut node_to_dof = vec![None; mesh.node_count()];
        let mut dof_to_node = Vec::new();
        for (node, slot) in node_to_dof.iter_mut().enumerate() {
            let tag = mesh.boundary_tag(node).expect("node in range");
            if !dirichlet.contains(tag) {
                *slot = Some(dof_to_node.len());
                dof_to_node.push(node);
            }
        }
        Self { node_to_dof, dof_to_node }
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        self.node_to_dof.get(node).copied().flatten()
    }

    pub fn node(&self, dof: usize) -> usize {
        self.dof_to_node[dof]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.dof_to_node
    }
}

/// Nested meshes, coarsest first, sharing one Dirichlet specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    levels: Vec<(MeshLevel, DofMap)>,
    dirichlet: DirichletSet,
}

impl Hierarchy {
    pub fn build(levels: usize, coarse_cells: usize, dirichlet: DirichletSet) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidHierarchy(format!("need at least 2 levels, got {levels}")));
        }
        if coarse_cells < 2 {
            return Err(Error::InvalidHierarchy(format!("need at least 2 coarse cells per side, got {coarse_cells}")));
        }
        if levels > 16 {
            return Err(Error::InvalidHierarchy(format!("{levels} levels is beyond any sensible grid")));
        }
        let levels = (0..levels)
            .map(|l| {
                let mesh = MeshLevel::new(l, coarse_cells << l);
                let dofs = DofMap::new(&mesh, dirichlet);
                (mesh, dofs)
            })
            .collect();
        Ok(Self { levels, dirichlet })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn dirichlet(&self) -> DirichletSet {
        self.dirichlet
    }

    pub fn mesh(&self, level: usize) -> &MeshLevel {
        &self.levels[level].0
    }

    pub fn dofs(&self, level: usize) -> &DofMap {
        &self.levels[level].1
    }

    pub fn n_dofs(&self, level: usize) -> usize {
        self.levels[level].1.n_dofs()
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if level < self.levels.len() {
            Ok(())
        } else {
            Err(Error::OutOfRange { index: level, size: self.levels.len() })
        }
    }

    /// Coordinates of every unknown on a level, in dof order.
    pub fn dof_coords(&self, level: usize) -> Vec<(f64, f64)> {
        let (mesh, dofs) = &self.levels[level];
        dofs.nodes().iter().map(|&n| mesh.node_coord(n).expect("valid node")).collect()
    }
}
