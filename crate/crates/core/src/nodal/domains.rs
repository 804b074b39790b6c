use serde::{Deserialize, Serialize};

use super::tie_break;
use crate::error::{Error, Result};
use crate::fem::{assemble_subset, MassKind};
use crate::mesh::SimplicialMesh;
use crate::metric::{simplex, EdgeLengthMetric};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalDomains {
    pub count: usize,
    /// Metric volume per domain (vertex-lumped).
    pub volumes: Vec<f64>,
    /// Sign of each domain.
    pub signs: Vec<i8>,
    /// Domain of each vertex.
    pub vertex_domain: Vec<usize>,
}

/// Connected components of `{u > 0}` and `{u < 0}` at vertex level: two
/// vertices of an edge belong to the same domain when `u` has the same
/// sign at both.
pub fn nodal_domains(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    u: &[f64],
    zero_shift: f64,
) -> Result<NodalDomains> {
    if u.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(
            "function must have one value per vertex".into(),
        ));
    }
    let u = tie_break(u, zero_shift)?;
    let nv = mesh.num_vertices();
    let mut uf = UnionFind::new(nv);
    for &[a, b] in mesh.edges() {
        if (u[a] > 0.0) == (u[b] > 0.0) {
            uf.union(a, b);
        }
    }
    let (labels, count) = uf.labels(|_| true);
    let vertex_domain: Vec<usize> = labels
        .into_iter()
        .map(|l| l.expect("every vertex kept"))
        .collect();
    let mut volumes = vec![0.0; count];
    let mut signs = vec![0i8; count];
    for (v, &d) in vertex_domain.iter().enumerate() {
        signs[d] = if u[v] > 0.0 { 1 } else { -1 };
    }
    let np = (mesh.dim + 1) as f64;
    for c in 0..mesh.num_cells() {
        let vol = simplex::sq_volume(mesh.dim, &metric.cell_lengths(mesh, c))
            .max(0.0)
            .sqrt();
        for &v in &mesh.cells[c] {
            volumes[vertex_domain[v]] += vol / np;
        }
    }
    Ok(NodalDomains {
        count,
        volumes,
        signs,
        vertex_domain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub beta: f64,
    pub rel_l2_error: f64,
}

/// Fits `beta cos(k pi (x + 1) / 2)` to `u` on the cells of collar
/// `collar` (all collars when `None`) in the metric's `L^2` norm.
pub fn profile_error(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    u: &[f64],
    collar: Option<usize>,
    k: usize,
) -> Result<ProfileFit> {
    let use_cell: Vec<bool> = mesh
        .region
        .iter()
        .map(|r| match (r.collar_index(), collar) {
            (Some(_), None) => true,
            (Some(i), Some(j)) => i == j,
            _ => false,
        })
        .collect();
    if !use_cell.iter().any(|&b| b) {
        return Err(Error::InvalidArgument("collar is empty".into()));
    }
    let mut vertex_dof = vec![None; mesh.num_vertices()];
    let mut verts = Vec::new();
    for (c, cell) in mesh.cells.iter().enumerate() {
        if use_cell[c] {
            for &v in cell {
                if vertex_dof[v].is_none() {
                    vertex_dof[v] = Some(0);
                    verts.push(v);
                }
            }
        }
    }
    verts.sort_unstable();
    for (i, &v) in verts.iter().enumerate() {
        vertex_dof[v] = Some(i);
    }
    let (_, m) = assemble_subset(
        mesh,
        metric,
        &use_cell,
        &vertex_dof,
        verts.len(),
        MassKind::Consistent,
    )?;
    let kf = k as f64;
    let f: Vec<f64> = verts
        .iter()
        .map(|&v| {
            let x = mesh.collar_x[v].expect("collar vertex carries x");
            (kf * std::f64::consts::PI * (x + 1.0) / 2.0).cos()
        })
        .collect();
    let uc: Vec<f64> = verts.iter().map(|&v| u[v]).collect();
    let mf = m.mul_vec(&f);
    let ff = crate::sparse::dot(&f, &mf);
    let uf = crate::sparse::dot(&uc, &mf);
    let beta = uf / ff;
    let r: Vec<f64> = uc.iter().zip(&f).map(|(a, b)| a - beta * b).collect();
    let err = m.quad_form(&r).max(0.0).sqrt();
    let scale = (beta * beta * ff).sqrt();
    if !(scale > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(ProfileFit {
        beta,
        rel_l2_error: err / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sphere_mesh, CollarSpec, SigmaModel};
    use crate::metric::reference_metric;

    fn capsule() -> (SimplicialMesh, EdgeLengthMetric) {
        let c = CollarSpec::new(SigmaModel::Circle, 0.3, 16);
        let m = build_sphere_mesh(2, 2, Some(&c)).unwrap();
        let g = reference_metric(&m, &[c]).unwrap();
        (m, g)
    }

    fn profile(m: &SimplicialMesh, k: f64, outside: f64) -> Vec<f64> {
        (0..m.num_vertices())
            .map(|v| {
                m.collar_x[v].map_or(outside, |x| {
                    (k * std::f64::consts::PI * (x + 1.0) / 2.0).cos()
                })
            })
            .collect()
    }

    #[test]
    fn domain_counts() {
        let (m, g) = capsule();
        assert_eq!(
            nodal_domains(&m, &g, &vec![1.0; m.num_vertices()], 1e-9)
                .unwrap()
                .count,
            1
        );
        // cos(pi (x + 1) / 2) is +1 at x = -1, -1 at x = 1
        let u1: Vec<f64> = (0..m.num_vertices())
            .map(|v| {
                m.collar_x[v].map_or(if m.coords[v][2] < 0.0 { 1.0 } else { -1.0 }, |x| {
                    (std::f64::consts::PI * (x + 1.0) / 2.0).cos()
                })
            })
            .collect();
        let d = nodal_domains(&m, &g, &u1, 1e-9).unwrap();
        assert_eq!(d.count, 2);
        let total: f64 = d.volumes.iter().sum();
        assert!((total - crate::fem::volume(&m, &g)).abs() < 1e-10);
        assert_eq!(
            nodal_domains(&m, &g, &profile(&m, 2.0, 1.0), 1e-9)
                .unwrap()
                .count,
            3
        );
    }

    #[test]
    fn exact_profile_fits() {
        let (m, g) = capsule();
        let u: Vec<f64> = profile(&m, 2.0, 0.0).iter().map(|x| 3.5 * x).collect();
        let fit = profile_error(&m, &g, &u, None, 2).unwrap();
        assert!((fit.beta - 3.5).abs() < 1e-12);
        assert!(fit.rel_l2_error < 1e-12);
    }

    #[test]
    fn orthogonal_sigma_mode_gives_its_size() {
        let (m, g) = capsule();
        let base = profile(&m, 1.0, 0.0);
        // cos(2 theta) along the circle, same collar profile
        let pert: Vec<f64> = (0..m.num_vertices())
            .map(|v| {
                let (x, y) = (m.coords[v][0], m.coords[v][1]);
                let c2 = (x * x - y * y) / (x * x + y * y).max(1e-300);
                base[v] * c2 * 2f64.sqrt()
            })
            .collect();
        let u: Vec<f64> = base.iter().zip(&pert).map(|(a, b)| a + 0.1 * b).collect();
        let fit = profile_error(&m, &g, &u, None, 1).unwrap();
        assert!(
            (fit.rel_l2_error - 0.1).abs() < 0.005,
            "{}",
            fit.rel_l2_error
        );
        assert!((fit.beta - 1.0).abs() < 1e-3);
    }
}
