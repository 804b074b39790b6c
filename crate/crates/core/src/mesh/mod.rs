//! Simplicial meshes of the model manifolds with a designated collar.
//!
//! A collar is a band `(-1, 1) x Sigma` around a hypersurface `Sigma`. Cells
//! inside it carry [`Region::Collar`], and every vertex of a collar cell
//! carries its normal coordinate `collar_x` in `[-1, 1]`. All other cells are
//! exterior; `exterior_depth` measures how far (in reference-metric units) a
//! vertex lies from the closed collar.

mod audit;
mod generate;
mod io;
mod sigma;

pub use audit::{mesh_audit, AuditReport};
pub use generate::{
    build_ball_mesh, build_handlebody_mesh, build_multi_collar_mesh, build_sphere_mesh,
    build_suspension_mesh, build_torus_mesh, kuhn_torus, HandlebodySpec, LineSegment,
};
pub use io::{MeshFile, MESH_FORMAT_VERSION};
pub use sigma::SigmaMesh;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell label. `Transition` is reserved for cells straddling a collar
/// boundary in user-supplied meshes; the built-in generators never emit it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Collar(usize),
    Exterior,
    Transition,
}

impl Region {
    pub fn collar_index(self) -> Option<usize> {
        match self {
            Region::Collar(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaModel {
    Circle,
    Sphere2,
    Torus2,
    Custom,
}

impl SigmaModel {
    /// First nonzero Laplace eigenvalue of `Sigma` scaled by `r`: unit circle
    /// and round `S^2` radius `r`, or the flat torus with both periods `2 pi r`.
    pub fn first_eigenvalue(self, r: f64) -> Option<f64> {
        match self {
            SigmaModel::Circle | SigmaModel::Torus2 => Some(1.0 / (r * r)),
            SigmaModel::Sphere2 => Some(2.0 / (r * r)),
            SigmaModel::Custom => None,
        }
    }

    /// Euler characteristic of the model hypersurface.
    pub fn euler_characteristic(self) -> Option<i64> {
        match self {
            SigmaModel::Circle | SigmaModel::Torus2 => Some(0),
            SigmaModel::Sphere2 => Some(2),
            SigmaModel::Custom => None,
        }
    }
}

/// Geometry of one collar: `Gamma^2 dx^2 + r^2 g_Sigma` on `(-1, 1) x Sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarSpec {
    pub sigma_model: SigmaModel,
    pub r: f64,
    pub gamma: f64,
    pub layers: usize,
    pub label: usize,
}

impl CollarSpec {
    pub fn new(sigma_model: SigmaModel, r: f64, layers: usize) -> Self {
        Self {
            sigma_model,
            r,
            gamma: 1.0,
            layers,
            label: 0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = label;
        self
    }

    /// Collar normal spacing in reference-metric units.
    pub fn layer_spacing(&self) -> f64 {
        2.0 * self.gamma / self.layers as f64
    }

    /// Checks the shape constraints and, for `l > 0`, that the first `Sigma`
    /// eigenvalue exceeds `l^2 pi^2 / 4` so the low collar modes are
    /// constant along `Sigma`.
    pub fn validate(&self, l: usize) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "collar r must be positive, got {}",
                self.r
            )));
        }
        if !(self.gamma > 0.5 && self.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "collar gamma must lie in (1/2, 1], got {}",
                self.gamma
            )));
        }
        if self.layers < 4 {
            return Err(Error::InvalidArgument(format!(
                "collar needs at least 4 layers, got {}",
                self.layers
            )));
        }
        if let Some(lambda) = self.sigma_model.first_eigenvalue(self.r) {
            let needed = (l * l) as f64 * std::f64::consts::PI.powi(2) / 4.0;
            if l > 0 && lambda <= needed {
                return Err(Error::InvalidArgument(format!(
                    "Sigma eigenvalue {lambda:.4} (r = {}) does not exceed l^2 pi^2/4 = {needed:.4} for l = {l}",
                    self.r
                )));
            }
        }
        Ok(())
    }
}

/// Stretch constants across several collars must start at 1 and strictly
/// decrease while staying above 1/2.
pub fn validate_collar_family(collars: &[CollarSpec]) -> Result<()> {
    if let Some(first) = collars.first() {
        if (first.gamma - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "first collar must have gamma = 1".into(),
            ));
        }
    }
    for w in collars.windows(2) {
        if !(w[1].gamma < w[0].gamma) {
            return Err(Error::InvalidArgument(format!(
                "collar gammas must strictly decrease ({} then {})",
                w[0].gamma, w[1].gamma
            )));
        }
    }
    for c in collars {
        if c.gamma <= 0.5 {
            return Err(Error::InvalidArgument(
                "collar gamma must exceed 1/2".into(),
            ));
        }
    }
    Ok(())
}

/// How reference edge lengths are read off the vertex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Coordinates are points of an embedding; lengths are Euclidean chords.
    Embedded,
    /// Flat chart with the given periods (0 for a non-periodic axis);
    /// lengths use the minimal periodic image.
    FlatPeriodic { periods: Vec<f64> },
    /// Flat periodic chart with a level-set collar around `phi = 0`. The
    /// metric is `s^2 g_flat + (1/w^2 - s^2) dphi^2`, with `w` the collar
    /// half-width and `s` the tangential scale.
    ImplicitCollar {
        periods: Vec<f64>,
        phi: Vec<f64>,
        half_width: f64,
        tangential_scale: f64,
    },
}

/// Local vertex pairs of an `n`-simplex in the fixed order used by
/// [`SimplicialMesh::cell_edges`].
pub fn local_pairs(dim: usize) -> &'static [(usize, usize)] {
    const TRI: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    const TET: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    const SEG: [(usize, usize); 1] = [(0, 1)];
    match dim {
        1 => &SEG,
        2 => &TRI,
        3 => &TET,
        _ => panic!("unsupported simplex dimension {dim}"),
    }
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    pub dim: usize,
    pub coords: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    pub boundary_facets: Vec<Vec<usize>>,
    pub region: Vec<Region>,
    pub collar_x: Vec<Option<f64>>,
    pub exterior_depth: Vec<f64>,
    pub geometry: Geometry,
    edges: Vec<[usize; 2]>,
    edge_map: HashMap<(usize, usize), usize>,
    cell_edges: Vec<Vec<usize>>,
    vertex_cells: Vec<Vec<usize>>,
}

impl SimplicialMesh {
    /// Builds a mesh with all cells exterior and no collar data. Cells are
    /// re-oriented coherently when the complex is orientable; otherwise the
    /// input orientation is kept and [`mesh_audit`] will report it.
    pub fn new(
        dim: usize,
        coords: Vec<Vec<f64>>,
        cells: Vec<Vec<usize>>,
        geometry: Geometry,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} not supported"
            )));
        }
        let nv = coords.len();
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    dim + 1
                )));
            }
            if cell.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} references a missing vertex"
                )));
            }
            let mut s = cell.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!("cell {c} repeats a vertex")));
            }
        }
        let ncells = cells.len();
        let mut mesh = Self {
            dim,
            coords,
            cells,
            boundary_facets: Vec::new(),
            region: vec![Region::Exterior; ncells],
            collar_x: vec![None; nv],
            exterior_depth: vec![0.0; nv],
            geometry,
            edges: Vec::new(),
            edge_map: HashMap::new(),
            cell_edges: Vec::new(),
            vertex_cells: Vec::new(),
        };
        let _ = mesh.orient_cells();
        mesh.rebuild_topology();
        Ok(mesh)
    }

    fn rebuild_topology(&mut self) {
        let pairs = local_pairs(self.dim);
        let mut edges = Vec::new();
        let mut edge_map = HashMap::new();
        let mut cell_edges = Vec::with_capacity(self.cells.len());
        let mut vertex_cells = vec![Vec::new(); self.coords.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            let mut ce = Vec::with_capacity(pairs.len());
            for &(i, j) in pairs {
                let key = sorted_pair(cell[i], cell[j]);
                let id = *edge_map.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                ce.push(id);
            }
            cell_edges.push(ce);
            for &v in cell {
                vertex_cells[v].push(c);
            }
        }
        self.edges = edges;
        self.edge_map = edge_map;
        self.cell_edges = cell_edges;
        self.vertex_cells = vertex_cells;
        let mut boundary: Vec<Vec<usize>> = self
            .facet_incidence()
            .into_iter()
            .filter(|(_, inc)| inc.len() == 1)
            .map(|(f, inc)| {
                // keep the orientation induced by the cell
                let (c, i) = inc[0];
                let mut facet: Vec<usize> = self.cells[c]
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, &v)| v)
                    .collect();
                if i % 2 == 1 && facet.len() >= 2 {
                    facet.swap(0, 1);
                }
                debug_assert_eq!(sorted(&facet), f);
                facet
            })
            .collect();
        boundary.sort_by_key(|f| sorted(f));
        self.boundary_facets = boundary;
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_map.get(&sorted_pair(a, b)).copied()
    }

    /// Edge ids of a cell in [`local_pairs`] order.
    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_facets.is_empty()
    }

    /// Sorted facet -> incident (cell, local index of the opposite vertex).
    pub fn facet_incidence(&self) -> HashMap<Vec<usize>, Vec<(usize, usize)>> {
        let mut map: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            for i in 0..cell.len() {
                let mut f: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, &v)| v)
                    .collect();
                f.sort_unstable();
                map.entry(f).or_default().push((c, i));
            }
        }
        map
    }

    /// Vertices on the boundary of the manifold.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.num_vertices()];
        for f in &self.boundary_facets {
            for &v in f {
                on[v] = true;
            }
        }
        on
    }

    /// Whether each edge lies in the boundary of the manifold.
    pub fn boundary_edges(&self) -> Vec<bool> {
        let mut on = vec![false; self.edges.len()];
        for f in &self.boundary_facets {
            for a in 0..f.len() {
                for b in a + 1..f.len() {
                    if let Some(e) = self.edge_id(f[a], f[b]) {
                        on[e] = true;
                    }
                }
            }
        }
        on
    }

    /// Vertex-neighbour lists (sorted).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.num_vertices()];
        for &[a, b] in &self.edges {
            nb[a].push(b);
            nb[b].push(a);
        }
        for l in nb.iter_mut() {
            l.sort_unstable();
        }
        nb
    }

    /// Vertices touched by a cell of collar `i` (any collar when `None`).
    pub fn collar_vertices(&self, collar: Option<usize>) -> Vec<bool> {
        let mut on = vec![false; self.num_vertices()];
        for (c, cell) in self.cells.iter().enumerate() {
            let hit = match (self.region[c], collar) {
                (Region::Collar(_), None) => true,
                (Region::Collar(j), Some(i)) => i == j,
                _ => false,
            };
            if hit {
                for &v in cell {
                    on[v] = true;
                }
            }
        }
        on
    }

    /// Number of distinct collar labels carried by the cells.
    pub fn collar_count(&self) -> usize {
        self.region
            .iter()
            .filter_map(|r| r.collar_index())
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Collar index owning a vertex, if the vertex touches a collar cell.
    pub fn vertex_collar(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.num_vertices()];
        for (c, cell) in self.cells.iter().enumerate() {
            if let Region::Collar(i) = self.region[c] {
                for &v in cell {
                    out[v] = Some(i);
                }
            }
        }
        out
    }

    /// Number of `k`-faces for `k = 0..=dim`.
    pub fn face_counts(&self) -> Vec<usize> {
        let mut counts = vec![self.num_vertices(), self.edges.len()];
        if self.dim >= 2 {
            let mut tris = std::collections::HashSet::new();
            for cell in &self.cells {
                let n = cell.len();
                for a in 0..n {
                    for b in a + 1..n {
                        for c in b + 1..n {
                            let mut t = [cell[a], cell[b], cell[c]];
                            t.sort_unstable();
                            tris.insert(t);
                        }
                    }
                }
            }
            counts.push(tris.len());
        }
        if self.dim >= 3 {
            counts.push(self.cells.len());
        }
        counts.truncate(self.dim + 1);
        counts
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.face_counts()
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Sign (+1/-1) of the orientation a cell induces on its facet opposite
    /// local vertex `i`, relative to the sorted facet.
    pub(crate) fn induced_sign(&self, cell: usize, i: usize) -> i32 {
        let facet: Vec<usize> = self.cells[cell]
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &v)| v)
            .collect();
        let base = if i.is_multiple_of(2) { 1 } else { -1 };
        base * permutation_parity(&facet)
    }

    /// Propagates the orientation of the first cell of each connected piece
    /// across shared facets. Returns `false` if the complex is not
    /// orientable (the conflicting cells are left as they are).
    pub fn orient_cells(&mut self) -> bool {
        let incidence = self.facet_incidence();
        let ncells = self.cells.len();
        let mut neighbors: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); ncells];
        for inc in incidence.values() {
            if inc.len() == 2 {
                let (c0, i0) = inc[0];
                let (c1, i1) = inc[1];
                neighbors[c0].push((c1, i0, i1));
                neighbors[c1].push((c0, i1, i0));
            }
        }
        for nb in neighbors.iter_mut() {
            nb.sort_unstable();
        }
        let sign: Vec<Vec<i32>> = (0..ncells)
            .map(|c| (0..=self.dim).map(|i| self.induced_sign(c, i)).collect())
            .collect();
        let mut flip: Vec<Option<i32>> = vec![None; ncells];
        let mut orientable = true;
        for start in 0..ncells {
            if flip[start].is_some() {
                continue;
            }
            flip[start] = Some(1);
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                let fc = flip[c].unwrap_or(1);
                for &(d, ic, id) in &neighbors[c] {
                    // d must induce the opposite sign on the shared facet
                    let want = -fc * sign[c][ic] * sign[d][id];
                    match flip[d] {
                        None => {
                            flip[d] = Some(want);
                            queue.push_back(d);
                        }
                        Some(f) if f != want => orientable = false,
                        _ => {}
                    }
                }
            }
        }
        for (cell, f) in self.cells.iter_mut().zip(&flip) {
            if *f == Some(-1) {
                cell.swap(0, 1);
            }
        }
        orientable
    }

    /// Assigns collar labels and coordinates.
    pub fn set_collar_data(
        &mut self,
        region: Vec<Region>,
        collar_x: Vec<Option<f64>>,
        exterior_depth: Vec<f64>,
    ) -> Result<()> {
        if region.len() != self.num_cells()
            || collar_x.len() != self.num_vertices()
            || exterior_depth.len() != self.num_vertices()
        {
            return Err(Error::InvalidArgument("collar data length mismatch".into()));
        }
        self.region = region;
        self.collar_x = collar_x;
        self.exterior_depth = exterior_depth;
        Ok(())
    }

    /// Reference length of an edge read from the coordinates.
    pub fn coordinate_length(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (&self.coords[a], &self.coords[b]);
        match &self.geometry {
            Geometry::Embedded => euclid(pa, pb),
            Geometry::FlatPeriodic { periods } => periodic_distance(pa, pb, periods),
            Geometry::ImplicitCollar {
                periods,
                phi,
                half_width,
                tangential_scale,
            } => {
                let flat = periodic_distance(pa, pb, periods);
                let dphi = phi[b] - phi[a];
                let s2 = tangential_scale * tangential_scale;
                let normal = 1.0 / (half_width * half_width) - s2;
                (s2 * flat * flat + normal * dphi * dphi).sqrt()
            }
        }
    }

    /// Edge lengths of a cell under the coordinate geometry, in
    /// [`local_pairs`] order.
    pub fn cell_coordinate_lengths(&self, cell: usize) -> Vec<f64> {
        let verts = &self.cells[cell];
        local_pairs(self.dim)
            .iter()
            .map(|&(i, j)| self.coordinate_length(verts[i], verts[j]))
            .collect()
    }
}

pub(crate) fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

/// +1 for an even permutation of the sorted order, -1 for odd.
pub(crate) fn permutation_parity(v: &[usize]) -> i32 {
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Minimal periodic representative of a coordinate difference (`period`
/// 0 means non-periodic).
pub fn periodic_delta(d: f64, period: f64) -> f64 {
    if period > 0.0 {
        d - period * (d / period).round()
    } else {
        d
    }
}

pub(crate) fn periodic_distance(a: &[f64], b: &[f64], periods: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| periodic_delta(y - x, periods.get(k).copied().unwrap_or(0.0)).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> SimplicialMesh {
        SimplicialMesh::new(
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
        .unwrap()
    }

    #[test]
    fn square_topology() {
        let m = two_triangles();
        assert_eq!(m.edges().len(), 5);
        assert_eq!(m.boundary_facets.len(), 4);
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.edge_id(2, 0).is_some());
        assert!(m.edge_id(1, 3).is_none());
    }

    #[test]
    fn orientation_is_repaired() {
        let mut m = SimplicialMesh::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
            vec![vec![0, 1, 2], vec![0, 3, 2]],
            Geometry::Embedded,
        )
        .unwrap();
        let inc = m.facet_incidence();
        let shared = &inc[&vec![0, 2]];
        let (c0, i0) = shared[0];
        let (c1, i1) = shared[1];
        assert_eq!(m.induced_sign(c0, i0), -m.induced_sign(c1, i1));
        assert!(m.orient_cells());
    }

    #[test]
    fn collar_validation() {
        let c = CollarSpec::new(SigmaModel::Sphere2, 0.4, 8);
        assert!(c.validate(2).is_ok());
        // 2 / 0.5^2 = 8 < pi^2 = 9.87
        assert!(CollarSpec::new(SigmaModel::Sphere2, 0.5, 8)
            .validate(2)
            .is_err());
        assert!(c.clone().with_gamma(0.5).validate(1).is_err());
        assert!(CollarSpec::new(SigmaModel::Circle, 0.4, 3)
            .validate(1)
            .is_err());
        let fam = [c.clone(), c.clone().with_gamma(0.8)];
        assert!(validate_collar_family(&fam).is_ok());
        assert!(validate_collar_family(&[c.clone(), c.clone()]).is_err());
    }

    #[test]
    fn periodic_distance_wraps() {
        let d = periodic_distance(&[0.1, 0.0], &[0.9, 0.0], &[1.0, 0.0]);
        assert!((d - 0.2).abs() < 1e-15);
    }
}
