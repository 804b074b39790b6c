//! PL zero sets of vertex functions.
//!
//! A P1 function vanishes inside a cell on a segment (triangles) or on a
//! triangle or quadrilateral (tetrahedra) whose corners lie on sign-changing
//! edges. Corners are keyed by their mesh edge, so neighbouring pieces share
//! them and components fall out of a union-find over corners.

mod census;
mod domains;

pub use census::{
    component_census, copy_positions, CensusCheck, CensusMode, CensusReport, Expectation,
};
pub use domains::{nodal_domains, profile_error, NodalDomains, ProfileFit};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{periodic_delta, Geometry, SimplicialMesh};
use crate::metric::{simplex, EdgeLengthMetric};
use crate::union_find::UnionFind;

/// Default relative vertex-zero shift.
pub const DEFAULT_ZERO_SHIFT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalPoint {
    pub edge: [usize; 2],
    /// Position along the edge from `edge[0]`.
    pub t: f64,
    pub collar_x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub cell: usize,
    /// Corner indices into `points`, ordered so the positive side lies on
    /// the left (segments) or along the right-hand normal (polygons).
    pub corners: Vec<usize>,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub pieces: usize,
    pub euler_char: i64,
    /// Every interior corner is shared consistently by its pieces.
    pub closed: bool,
    pub orientable: bool,
    pub area: f64,
    pub collar_mean: Option<f64>,
    pub collar_std: Option<f64>,
    /// All corners carry a collar coordinate.
    pub inside_collar: bool,
    pub touches_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalComplex {
    pub dim: usize,
    pub points: Vec<NodalPoint>,
    pub pieces: Vec<Piece>,
    pub components: Vec<ComponentInfo>,
}

/// Applies the deterministic tie-break: values with `|u| < shift ||u||_inf`
/// become `+shift ||u||_inf`.
pub fn tie_break(u: &[f64], shift: f64) -> Result<Vec<f64>> {
    let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(norm > 0.0) {
        return Err(Error::ZeroVector);
    }
    let s = shift * norm;
    Ok(u.iter().map(|&x| if x.abs() < s { s } else { x }).collect())
}

/// Barycentric coordinates of a corner inside `cell`.
fn corner_bary(cell: &[usize], p: &NodalPoint) -> Vec<f64> {
    let mut b = vec![0.0; cell.len()];
    for (k, &v) in cell.iter().enumerate() {
        if v == p.edge[0] {
            b[k] = 1.0 - p.t;
        } else if v == p.edge[1] {
            b[k] = p.t;
        }
    }
    b
}

fn det_rows(rows: &[Vec<f64>]) -> f64 {
    match rows.len() {
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => {
            let r = rows;
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        }
        _ => unreachable!(),
    }
}

/// Extracts the zero set of `u` (one value per vertex) after the tie-break.
pub fn extract_zero_set(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    u: &[f64],
    zero_shift: f64,
) -> Result<NodalComplex> {
    if u.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(
            "function must have one value per vertex".into(),
        ));
    }
    let u = tie_break(u, zero_shift)?;
    let dim = mesh.dim;
    let mut points = Vec::new();
    let mut point_of_edge: HashMap<usize, usize> = HashMap::new();
    let mut pieces = Vec::new();
    for (c, cell) in mesh.cells.iter().enumerate() {
        let pos: Vec<usize> = (0..=dim).filter(|&k| u[cell[k]] > 0.0).collect();
        let neg: Vec<usize> = (0..=dim).filter(|&k| u[cell[k]] < 0.0).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut corner = |i: usize, j: usize| -> usize {
            let (a, b) = (cell[i], cell[j]);
            let e = mesh.edge_id(a, b).expect("cell edge");
            *point_of_edge.entry(e).or_insert_with(|| {
                let [e0, e1] = mesh.edges()[e];
                let t = u[e0] / (u[e0] - u[e1]);
                let collar_x = match (mesh.collar_x[e0], mesh.collar_x[e1]) {
                    (Some(x0), Some(x1)) => Some(x0 + t * (x1 - x0)),
                    _ => None,
                };
                points.push(NodalPoint {
                    edge: [e0, e1],
                    t,
                    collar_x,
                });
                points.len() - 1
            })
        };
        let mut corners: Vec<usize> = match (dim, pos.len(), neg.len()) {
            (2, 1, 2) => vec![corner(pos[0], neg[0]), corner(pos[0], neg[1])],
            (2, 2, 1) => vec![corner(pos[0], neg[0]), corner(pos[1], neg[0])],
            (3, 1, 3) => (0..3).map(|k| corner(pos[0], neg[k])).collect(),
            (3, 3, 1) => (0..3).map(|k| corner(pos[k], neg[0])).collect(),
            (3, 2, 2) => {
                let (a, b, p, q) = (pos[0], pos[1], neg[0], neg[1]);
                vec![corner(a, p), corner(a, q), corner(b, q), corner(b, p)]
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unsupported dimension {dim}"
                )))
            }
        };
        // orient by the positive side in the cell's barycentric chart
        let bary: Vec<Vec<f64>> = corners
            .iter()
            .map(|&p| corner_bary(cell, &points[p]))
            .collect();
        let mut toward = vec![0.0; dim + 1];
        toward[pos[0]] = 1.0;
        let mut rows = Vec::with_capacity(dim);
        for q in bary.iter().skip(1).take(dim - 1) {
            rows.push((1..=dim).map(|k| q[k] - bary[0][k]).collect::<Vec<f64>>());
        }
        rows.push((1..=dim).map(|k| toward[k] - bary[0][k]).collect());
        if det_rows(&rows) < 0.0 {
            corners.reverse();
        }
        pieces.push(Piece {
            cell: c,
            corners,
            component: 0,
        });
    }

    let mut uf = UnionFind::new(points.len());
    for p in &pieces {
        for w in p.corners.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut comp_of_root: HashMap<usize, usize> = HashMap::new();
    for p in pieces.iter_mut() {
        let root = uf.find(p.corners[0]);
        let next = comp_of_root.len();
        p.component = *comp_of_root.entry(root).or_insert(next);
    }
    let ncomp = comp_of_root.len();

    let boundary_edges = mesh.boundary_edges();
    let mut comps = Vec::with_capacity(ncomp);
    for id in 0..ncomp {
        let members: Vec<&Piece> = pieces.iter().filter(|p| p.component == id).collect();
        comps.push(component_info(
            mesh,
            metric,
            &points,
            &members,
            &boundary_edges,
        ));
    }
    Ok(NodalComplex {
        dim,
        points,
        pieces,
        components: comps,
    })
}

fn component_info(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    points: &[NodalPoint],
    members: &[&Piece],
    boundary_edges: &[bool],
) -> ComponentInfo {
    let dim = mesh.dim;
    let mut corner_ids: Vec<usize> = members
        .iter()
        .flat_map(|p| p.corners.iter().copied())
        .collect();
    corner_ids.sort_unstable();
    corner_ids.dedup();
    // directed boundary edges of the pieces (facets of the zero set)
    let mut directed: HashMap<(usize, usize), i32> = HashMap::new();
    let mut heads: HashMap<usize, (i32, i32)> = HashMap::new();
    let mut area = 0.0;
    for p in members {
        let cell = &mesh.cells[p.cell];
        let lengths = metric.cell_lengths(mesh, p.cell);
        let g = simplex::gram(dim, &lengths);
        let bary: Vec<Vec<f64>> = p
            .corners
            .iter()
            .map(|&q| corner_bary(cell, &points[q]))
            .collect();
        if dim == 2 {
            area += simplex::barycentric_sq_distance(dim, &g, &bary[0], &bary[1]).sqrt();
            heads.entry(p.corners[0]).or_default().0 += 1;
            heads.entry(p.corners[1]).or_default().1 += 1;
        } else {
            for k in 1..bary.len() - 1 {
                let a2 = simplex::barycentric_sq_distance(dim, &g, &bary[0], &bary[k]);
                let b2 = simplex::barycentric_sq_distance(dim, &g, &bary[0], &bary[k + 1]);
                let c2 = simplex::barycentric_sq_distance(dim, &g, &bary[k], &bary[k + 1]);
                let ab = 0.5 * (a2 + b2 - c2);
                area += 0.5 * (a2 * b2 - ab * ab).max(0.0).sqrt();
            }
            let n = p.corners.len();
            for k in 0..n {
                let (a, b) = (p.corners[k], p.corners[(k + 1) % n]);
                let key = if a < b { (a, b) } else { (b, a) };
                *directed.entry(key).or_default() += if a < b { 1 } else { -1 };
            }
        }
    }
    let v = corner_ids.len() as i64;
    let (euler_char, closed, orientable) = if dim == 2 {
        let e = members.len() as i64;
        let closed = heads.values().all(|&(out, inc)| out == 1 && inc == 1);
        (v - e, closed, closed)
    } else {
        let e = directed.len() as i64;
        let f = members.len() as i64;
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for p in members {
            let n = p.corners.len();
            for k in 0..n {
                let (a, b) = (p.corners[k], p.corners[(k + 1) % n]);
                *counts
                    .entry(if a < b { (a, b) } else { (b, a) })
                    .or_default() += 1;
            }
        }
        let closed = counts.values().all(|&c| c == 2);
        let orientable = counts.iter().all(|(key, &c)| c != 2 || directed[key] == 0);
        (v - e + f, closed, orientable)
    };
    let xs: Vec<f64> = corner_ids
        .iter()
        .filter_map(|&q| points[q].collar_x)
        .collect();
    let inside_collar = !xs.is_empty() && xs.len() == corner_ids.len();
    let (collar_mean, collar_std) = if xs.is_empty() {
        (None, None)
    } else {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        (Some(mean), Some(var.sqrt()))
    };
    let touches_boundary = corner_ids.iter().any(|&q| {
        let [a, b] = points[q].edge;
        mesh.edge_id(a, b).is_some_and(|e| boundary_edges[e])
    });
    ComponentInfo {
        pieces: members.len(),
        euler_char,
        closed,
        orientable,
        area,
        collar_mean,
        collar_std,
        inside_collar,
        touches_boundary,
    }
}

/// Indexed soup for external viewers: corner coordinates, segments or
/// triangles (quads split), and the component of each element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSoup {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub elements: Vec<Vec<usize>>,
    pub component: Vec<usize>,
}

impl NodalComplex {
    pub fn to_soup(&self, mesh: &SimplicialMesh) -> NodalSoup {
        let periods: Option<&[f64]> = match &mesh.geometry {
            Geometry::Embedded => None,
            Geometry::FlatPeriodic { periods } | Geometry::ImplicitCollar { periods, .. } => {
                Some(periods)
            }
        };
        let vertices = self
            .points
            .iter()
            .map(|p| {
                let (a, b) = (&mesh.coords[p.edge[0]], &mesh.coords[p.edge[1]]);
                a.iter()
                    .zip(b)
                    .enumerate()
                    .map(|(k, (x, y))| {
                        let d = match periods {
                            Some(per) => periodic_delta(y - x, per.get(k).copied().unwrap_or(0.0)),
                            None => y - x,
                        };
                        x + p.t * d
                    })
                    .collect()
            })
            .collect();
        let mut elements = Vec::new();
        let mut component = Vec::new();
        for p in &self.pieces {
            if p.corners.len() == 4 {
                let c = &p.corners;
                elements.push(vec![c[0], c[1], c[2]]);
                elements.push(vec![c[0], c[2], c[3]]);
                component.extend([p.component, p.component]);
            } else {
                elements.push(p.corners.clone());
                component.push(p.component);
            }
        }
        NodalSoup {
            dim: self.dim,
            vertices,
            elements,
            component,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sphere_mesh, build_torus_mesh, CollarSpec, SigmaModel};
    use crate::metric::reference_metric;

    #[test]
    fn constant_has_empty_zero_set() {
        let m = build_sphere_mesh(2, 1, None).unwrap();
        let g = reference_metric(&m, &[]).unwrap();
        let nc =
            extract_zero_set(&m, &g, &vec![1.0; m.num_vertices()], DEFAULT_ZERO_SHIFT).unwrap();
        assert!(nc.is_empty());
        assert!(extract_zero_set(&m, &g, &vec![0.0; m.num_vertices()], 1e-9).is_err());
    }

    #[test]
    fn equator_of_sphere() {
        let m = build_sphere_mesh(3, 2, None).unwrap();
        let g = reference_metric(&m, &[]).unwrap();
        let u: Vec<f64> = m.coords.iter().map(|p| p[3] + 0.013).collect();
        let nc = extract_zero_set(&m, &g, &u, DEFAULT_ZERO_SHIFT).unwrap();
        assert_eq!(nc.components.len(), 1);
        let c = &nc.components[0];
        assert_eq!(c.euler_char, 2);
        assert!(c.closed && c.orientable && !c.touches_boundary);
        // a polyhedral sphere of radius about 1 inscribed in the unit 3-sphere
        assert!(c.area > 0.6 * 4.0 * std::f64::consts::PI && c.area < 4.0 * std::f64::consts::PI);
    }

    #[test]
    fn linear_collar_coordinate_on_t3() {
        let c = CollarSpec::new(SigmaModel::Torus2, 0.4, 4);
        let m = build_torus_mesh(3, 8, Some(&c)).unwrap();
        let g = reference_metric(&m, &[c]).unwrap();
        // collar_x on the collar, continued linearly in the exterior layers
        let u: Vec<f64> = (0..m.num_vertices())
            .map(|v| m.collar_x[v].unwrap_or(if m.coords[v][0] > 2.0 { 2.0 } else { -2.0 }))
            .collect();
        let u: Vec<f64> = u.iter().map(|x| x + 0.01).collect();
        let nc = extract_zero_set(&m, &g, &u, DEFAULT_ZERO_SHIFT).unwrap();
        let in_collar: Vec<_> = nc.components.iter().filter(|c| c.inside_collar).collect();
        assert_eq!(in_collar.len(), 1);
        assert_eq!(in_collar[0].euler_char, 0);
        assert!(in_collar[0].collar_mean.unwrap().abs() < 0.02);
    }

    #[test]
    fn two_copies_for_second_profile() {
        let c = CollarSpec::new(SigmaModel::Sphere2, 0.4, 16);
        let m = build_sphere_mesh(3, 1, Some(&c)).unwrap();
        let g = reference_metric(&m, &[c]).unwrap();
        // cos(pi (x+1)) on the collar, matching +1 on both caps
        let u: Vec<f64> = (0..m.num_vertices())
            .map(|v| m.collar_x[v].map_or(1.0, |x| (std::f64::consts::PI * (x + 1.0)).cos()))
            .collect();
        let nc = extract_zero_set(&m, &g, &u, DEFAULT_ZERO_SHIFT).unwrap();
        assert_eq!(nc.components.len(), 2);
        let mut means: Vec<f64> = nc
            .components
            .iter()
            .map(|c| c.collar_mean.unwrap())
            .collect();
        means.sort_by(f64::total_cmp);
        // exact zeros at x = +-1/2 are shifted, moving the surface by under a layer
        assert!((means[0] + 0.5).abs() < 0.13 && (means[1] - 0.5).abs() < 0.13);
        assert!(nc.components.iter().all(|c| c.euler_char == 2));
        let soup = nc.to_soup(&m);
        assert_eq!(soup.elements.len(), soup.component.len());
    }
}
