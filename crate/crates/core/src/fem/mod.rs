//! P1 finite elements on a piecewise-flat metric.
//!
//! Each cell is realized intrinsically from its edge lengths through the
//! Gram matrix `G` of the edge vectors leaving local vertex 0. The
//! barycentric gradients of vertices `1..=n` then have inner products
//! `G^{-1}`, so the local stiffness needs no coordinates.

mod bound;

pub use bound::{
    harmonic_extension, upper_bound_check, BoundEntry, HarmonicExtension, UpperBoundReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::metric::{simplex, EdgeLengthMetric};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Closed manifold, or natural (Neumann) conditions on `dM`.
    Closed,
    /// The collar alone with natural conditions on its boundary.
    NeumannCollar,
    /// Homogeneous Dirichlet conditions on `dM`.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassKind {
    Consistent,
    Lumped,
}

/// Stiffness and mass over the free degrees of freedom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorPair {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub boundary_condition: BoundaryCondition,
    pub mass_kind: MassKind,
    /// Vertices without a degree of freedom (Dirichlet or outside the
    /// collar for `NeumannCollar`).
    pub constrained_vertices: Vec<usize>,
    /// Vertex of each degree of freedom.
    pub dof_vertex: Vec<usize>,
    pub num_vertices: usize,
}

impl OperatorPair {
    pub fn size(&self) -> usize {
        self.dof_vertex.len()
    }

    /// Restricts a vertex vector to the degrees of freedom.
    pub fn to_dofs(&self, full: &[f64]) -> Vec<f64> {
        self.dof_vertex.iter().map(|&v| full[v]).collect()
    }

    /// Extends a dof vector by zero to all vertices.
    pub fn to_full(&self, dofs: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_vertices];
        for (&v, &x) in self.dof_vertex.iter().zip(dofs) {
            full[v] = x;
        }
        full
    }

    /// Both matrices in the coordinate text format.
    pub fn export_coordinate(&self) -> (String, String) {
        (
            self.stiffness.to_coordinate_text(),
            self.mass.to_coordinate_text(),
        )
    }
}

/// Local stiffness and mass of one cell, row-major `(n+1) x (n+1)`.
pub fn local_matrices(
    dim: usize,
    lengths: &[f64],
    mass_kind: MassKind,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let g = simplex::gram(dim, lengths);
    let d = simplex::det(dim, &g);
    if !(d > 0.0) {
        return None;
    }
    let nfact: f64 = (1..=dim).map(|k| k as f64).product();
    let vol = d.sqrt() / nfact;
    let inv = simplex::inverse(dim, &g, d);
    let m = dim + 1;
    let mut k = vec![0.0; m * m];
    for i in 1..m {
        for j in 1..m {
            k[i * m + j] = vol * inv[i - 1][j - 1];
        }
    }
    for i in 1..m {
        let s: f64 = (1..m).map(|j| k[i * m + j]).sum();
        k[i * m] = -s;
        k[i] = -s;
    }
    k[0] = -(1..m).map(|j| k[j]).sum::<f64>();
    let mut mass = vec![0.0; m * m];
    match mass_kind {
        MassKind::Consistent => {
            let base = vol / ((m * (m + 1)) as f64);
            for i in 0..m {
                for j in 0..m {
                    mass[i * m + j] = if i == j { 2.0 * base } else { base };
                }
            }
        }
        MassKind::Lumped => {
            for i in 0..m {
                mass[i * m + i] = vol / m as f64;
            }
        }
    }
    Some((k, mass))
}

/// Assembles `K` and `M` over the cells with `use_cell[c]`, on the degrees
/// of freedom given by `vertex_dof`. Local matrices are computed in
/// parallel and summed in cell order.
pub(crate) fn assemble_subset(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    use_cell: &[bool],
    vertex_dof: &[Option<usize>],
    ndof: usize,
    mass_kind: MassKind,
) -> Result<(CsrMatrix, CsrMatrix)> {
    let cells: Vec<usize> = (0..mesh.num_cells()).filter(|&c| use_cell[c]).collect();
    let local = |&c: &usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let lengths = metric.cell_lengths(mesh, c);
        local_matrices(mesh.dim, &lengths, mass_kind).ok_or_else(|| Error::Unrealizable {
            cell: c,
            sq_volume: simplex::sq_volume(mesh.dim, &lengths),
        })
    };
    #[cfg(feature = "parallel")]
    let locals: Vec<Result<(Vec<f64>, Vec<f64>)>> = {
        use rayon::prelude::*;
        cells.par_iter().map(local).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let locals: Vec<Result<(Vec<f64>, Vec<f64>)>> = cells.iter().map(local).collect();

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); ndof];
    for &c in &cells {
        for &a in &mesh.cells[c] {
            if let Some(i) = vertex_dof[a] {
                for &b in &mesh.cells[c] {
                    if let Some(j) = vertex_dof[b] {
                        rows[i].push(j);
                    }
                }
            }
        }
    }
    for r in rows.iter_mut() {
        r.sort_unstable();
        r.dedup();
    }
    let mut k = CsrMatrix::from_pattern(ndof, ndof, &rows);
    let mut m = CsrMatrix::from_pattern(ndof, ndof, &rows);
    let np = mesh.dim + 1;
    for (&c, loc) in cells.iter().zip(locals) {
        let (kl, ml) = loc?;
        let cell = &mesh.cells[c];
        for a in 0..np {
            let Some(i) = vertex_dof[cell[a]] else {
                continue;
            };
            for b in 0..np {
                let Some(j) = vertex_dof[cell[b]] else {
                    continue;
                };
                k.add(i, j, kl[a * np + b]);
                if ml[a * np + b] != 0.0 {
                    m.add(i, j, ml[a * np + b]);
                }
            }
        }
    }
    Ok((k, m))
}

/// Assembles the operator pair for the given boundary condition.
pub fn assemble(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    bc: BoundaryCondition,
    mass_kind: MassKind,
) -> Result<OperatorPair> {
    metric.check_realizable(mesh)?;
    let nv = mesh.num_vertices();
    let (use_cell, keep): (Vec<bool>, Vec<bool>) = match bc {
        BoundaryCondition::Closed => (vec![true; mesh.num_cells()], vec![true; nv]),
        BoundaryCondition::Dirichlet => {
            if mesh.is_closed() {
                return Err(Error::InvalidArgument(
                    "Dirichlet conditions need a boundary".into(),
                ));
            }
            let on = mesh.boundary_vertices();
            (
                vec![true; mesh.num_cells()],
                on.iter().map(|b| !b).collect(),
            )
        }
        BoundaryCondition::NeumannCollar => {
            let cells: Vec<bool> = mesh
                .region
                .iter()
                .map(|r| r.collar_index().is_some())
                .collect();
            if !cells.iter().any(|&b| b) {
                return Err(Error::InvalidArgument("mesh has no collar cells".into()));
            }
            (cells, mesh.collar_vertices(None))
        }
    };
    let mut vertex_dof = vec![None; nv];
    let mut dof_vertex = Vec::new();
    let mut constrained = Vec::new();
    for v in 0..nv {
        if keep[v] {
            vertex_dof[v] = Some(dof_vertex.len());
            dof_vertex.push(v);
        } else {
            constrained.push(v);
        }
    }
    let (stiffness, mass) = assemble_subset(
        mesh,
        metric,
        &use_cell,
        &vertex_dof,
        dof_vertex.len(),
        mass_kind,
    )?;
    Ok(OperatorPair {
        stiffness,
        mass,
        boundary_condition: bc,
        mass_kind,
        constrained_vertices: constrained,
        dof_vertex,
        num_vertices: nv,
    })
}

/// `v^T K v / v^T M v` for a dof vector.
pub fn rayleigh(ops: &OperatorPair, v: &[f64]) -> Result<f64> {
    let den = ops.mass.quad_form(v);
    if !(den > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(ops.stiffness.quad_form(v) / den)
}

/// Piecewise-linear interpolant of `f(collar_x)` on vertices carrying a
/// collar coordinate, zero elsewhere.
pub fn collar_profile(mesh: &SimplicialMesh, f: impl Fn(f64) -> f64) -> Vec<f64> {
    mesh.collar_x.iter().map(|x| x.map_or(0.0, &f)).collect()
}

/// Total metric volume.
pub fn volume(mesh: &SimplicialMesh, metric: &EdgeLengthMetric) -> f64 {
    (0..mesh.num_cells())
        .map(|c| {
            simplex::sq_volume(mesh.dim, &metric.cell_lengths(mesh, c))
                .max(0.0)
                .sqrt()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sphere_mesh, CollarSpec, Geometry, SigmaModel};
    use crate::metric::{degenerate_metric, reference_metric};
    use approx::assert_relative_eq;

    fn unit_square() -> (SimplicialMesh, EdgeLengthMetric) {
        let m = SimplicialMesh::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
            Geometry::Embedded,
        )
        .unwrap();
        let g = reference_metric(&m, &[]).unwrap();
        (m, g)
    }

    #[test]
    fn two_triangle_cotangent_pattern() {
        let (m, g) = unit_square();
        let ops = assemble(&m, &g, BoundaryCondition::Closed, MassKind::Consistent).unwrap();
        let k = ops.stiffness.to_dense();
        // hand assembly: cot(pi/2) = 0 on the shared diagonal, 1/2 on sides
        let expect = [
            [1.0, -0.5, 0.0, -0.5],
            [-0.5, 1.0, -0.5, 0.0],
            [0.0, -0.5, 1.0, -0.5],
            [-0.5, 0.0, -0.5, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(k[(i, j)], expect[i][j], epsilon = 1e-14);
            }
        }
        let one = vec![1.0; 4];
        assert!(ops.stiffness.quad_form(&one).abs() < 1e-14);
        assert_relative_eq!(ops.mass.quad_form(&one), 1.0, epsilon = 1e-14);
        assert!(rayleigh(&ops, &[0.0; 4]).is_err());
    }

    #[test]
    fn exterior_weights_emerge_from_scaling() {
        for (n, sigma) in [(2, SigmaModel::Circle), (3, SigmaModel::Sphere2)] {
            let c = CollarSpec::new(sigma, 0.4, 8);
            let mesh = build_sphere_mesh(n, 1, Some(&c)).unwrap();
            let g0 = reference_metric(&mesh, &[c]).unwrap();
            let collar = mesh.collar_vertices(None);
            // supported strictly outside the closed collar
            let phi: Vec<f64> = (0..mesh.num_vertices())
                .map(|v| {
                    if collar[v] {
                        0.0
                    } else {
                        1.0 + mesh.coords[v][n]
                    }
                })
                .collect();
            let base =
                assemble(&mesh, &g0, BoundaryCondition::Closed, MassKind::Consistent).unwrap();
            let ge = degenerate_metric(&g0, &mesh, 0.25).unwrap();
            let ops =
                assemble(&mesh, &ge, BoundaryCondition::Closed, MassKind::Consistent).unwrap();
            let rk = ops.stiffness.quad_form(&phi) / base.stiffness.quad_form(&phi);
            let rm = ops.mass.quad_form(&phi) / base.mass.quad_form(&phi);
            assert_relative_eq!(rk, 0.25f64.powf(n as f64 / 2.0 - 1.0), epsilon = 1e-12);
            assert_relative_eq!(rm, 0.25f64.powf(n as f64 / 2.0), epsilon = 1e-12);
            assert_relative_eq!(
                rayleigh(&ops, &phi).unwrap(),
                rayleigh(&base, &phi).unwrap() / 0.25,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn constants_and_volume_on_sphere() {
        let mesh = build_sphere_mesh(2, 2, None).unwrap();
        let g = reference_metric(&mesh, &[]).unwrap();
        let ops = assemble(&mesh, &g, BoundaryCondition::Closed, MassKind::Lumped).unwrap();
        let one = vec![1.0; mesh.num_vertices()];
        assert!(ops.stiffness.quad_form(&one).abs() < 1e-12);
        assert_relative_eq!(ops.mass.quad_form(&one), volume(&mesh, &g), epsilon = 1e-12);
        assert!(ops.stiffness.asymmetry() < 1e-14);
    }
}
