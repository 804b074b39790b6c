//! Harmonic extension of collar data and the min-max upper bound built from
//! the collar Neumann modes.

use serde::{Deserialize, Serialize};

use super::{assemble, assemble_subset, collar_profile, BoundaryCondition, MassKind};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::metric::EdgeLengthMetric;
use crate::sparse::conjugate_gradient;
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicExtension {
    /// Vertex values: the data on the closed collar, the extension outside.
    pub values: Vec<f64>,
    /// Exterior components that reach neither the collar nor a Dirichlet
    /// boundary; they are set to 0.
    pub unconstrained_components: usize,
    /// `int_{Omega^c} |du|^2 + u^2` under the metric used.
    pub exterior_energy: f64,
}

/// Extends `data` (read on vertices of collar cells) harmonically into the
/// exterior cells under `metric`. With `dirichlet_outer` the extension
/// vanishes on `dM`.
pub fn harmonic_extension(
    mesh: &SimplicialMesh,
    metric: &EdgeLengthMetric,
    data: &[f64],
    dirichlet_outer: bool,
) -> Result<HarmonicExtension> {
    let nv = mesh.num_vertices();
    if data.len() != nv || data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "boundary data must be finite on every vertex".into(),
        ));
    }
    let exterior: Vec<bool> = mesh
        .region
        .iter()
        .map(|r| r.collar_index().is_none())
        .collect();
    if !exterior.iter().any(|&b| b) {
        return Err(Error::InvalidArgument("mesh has no exterior cells".into()));
    }
    let collar = mesh.collar_vertices(None);
    let outer = if dirichlet_outer {
        mesh.boundary_vertices()
    } else {
        vec![false; nv]
    };
    let mut in_ext = vec![false; nv];
    for (c, cell) in mesh.cells.iter().enumerate() {
        if exterior[c] {
            for &v in cell {
                in_ext[v] = true;
            }
        }
    }
    let known = |v: usize| collar[v] || outer[v];
    let mut values: Vec<f64> = (0..nv)
        .map(|v| if collar[v] { data[v] } else { 0.0 })
        .collect();

    // exterior components of unknown vertices and whether they see data
    let mut uf = UnionFind::new(nv);
    for (c, cell) in mesh.cells.iter().enumerate() {
        if exterior[c] {
            for &a in cell {
                for &b in cell {
                    if !known(a) && !known(b) {
                        uf.union(a, b);
                    }
                }
            }
        }
    }
    let mut anchored = vec![false; nv];
    for (c, cell) in mesh.cells.iter().enumerate() {
        if exterior[c] && cell.iter().any(|&v| known(v)) {
            for &v in cell {
                if !known(v) {
                    anchored[uf.find(v)] = true;
                }
            }
        }
    }
    let mut free = Vec::new();
    let mut unanchored_roots = std::collections::BTreeSet::new();
    for v in 0..nv {
        if in_ext[v] && !known(v) {
            if anchored[uf.find(v)] {
                free.push(v);
            } else {
                unanchored_roots.insert(uf.find(v));
            }
        }
    }

    // K_ff u_f = -K_fb g_b over exterior cells
    let mut all_dof = vec![None; nv];
    let mut ext_vertices = Vec::new();
    for v in 0..nv {
        if in_ext[v] {
            all_dof[v] = Some(ext_vertices.len());
            ext_vertices.push(v);
        }
    }
    let (k_ext, m_ext) = assemble_subset(
        mesh,
        metric,
        &exterior,
        &all_dof,
        ext_vertices.len(),
        MassKind::Consistent,
    )?;
    if !free.is_empty() {
        let keep: Vec<usize> = free
            .iter()
            .map(|&v| all_dof[v].expect("exterior vertex"))
            .collect();
        let k_ff = k_ext.principal_submatrix(&keep);
        let g_full: Vec<f64> = ext_vertices
            .iter()
            .map(|&v| if known(v) { values[v] } else { 0.0 })
            .collect();
        let kg = k_ext.mul_vec(&g_full);
        let rhs: Vec<f64> = keep.iter().map(|&i| -kg[i]).collect();
        let sol = conjugate_gradient(&k_ff, &rhs, None, 1e-12, 20 * free.len() + 100)
            .map_err(Error::Solve)?;
        for (&v, x) in free.iter().zip(sol) {
            values[v] = x;
        }
    }
    let u_ext: Vec<f64> = ext_vertices.iter().map(|&v| values[v]).collect();
    let exterior_energy = k_ext.quad_form(&u_ext) + m_ext.quad_form(&u_ext);
    Ok(HarmonicExtension {
        values,
        unconstrained_components: unanchored_roots.len(),
        exterior_energy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub k: usize,
    pub mu: f64,
    /// `max` of the Rayleigh quotient over `span{psi_0, ..., psi_k}`.
    pub bound: f64,
    /// `(bound - mu) / mu`, absent for `k = 0`.
    pub rel_excess: Option<f64>,
    /// `int_{Omega^c} |d v_hat|^2 + v_hat^2` divided by `mu + 1`.
    pub extension_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub entries: Vec<BoundEntry>,
    pub unconstrained_components: usize,
}

/// Builds `psi_k` from `cos(k pi (x + 1) / 2)` on the collars, extended
/// harmonically under `reference`, and bounds `lambda_k` of `metric` by the
/// largest Ritz value on `span{psi_0..psi_k}`.
pub fn upper_bound_check(
    mesh: &SimplicialMesh,
    reference: &EdgeLengthMetric,
    metric: &EdgeLengthMetric,
    gamma: f64,
    l: usize,
    bc: BoundaryCondition,
) -> Result<UpperBoundReport> {
    let ops = assemble(mesh, metric, bc, MassKind::Consistent)?;
    let dirichlet = bc == BoundaryCondition::Dirichlet;
    let mut psis = Vec::with_capacity(l + 1);
    let mut entries = Vec::with_capacity(l + 1);
    let mut unconstrained = 0;
    for k in 0..=l {
        let kf = k as f64;
        let data = collar_profile(mesh, |x| {
            (kf * std::f64::consts::PI * (x + 1.0) / 2.0).cos()
        });
        let ext = harmonic_extension(mesh, reference, &data, dirichlet)?;
        unconstrained = unconstrained.max(ext.unconstrained_components);
        let mu = kf * kf * std::f64::consts::PI.powi(2) / (4.0 * gamma * gamma);
        psis.push(ops.to_dofs(&ext.values));
        let m = k + 1;
        let mut a = nalgebra::DMatrix::zeros(m, m);
        let mut b = nalgebra::DMatrix::zeros(m, m);
        for i in 0..m {
            let kp = ops.stiffness.mul_vec(&psis[i]);
            let mp = ops.mass.mul_vec(&psis[i]);
            for j in 0..m {
                a[(i, j)] = crate::sparse::dot(&kp, &psis[j]);
                b[(i, j)] = crate::sparse::dot(&mp, &psis[j]);
            }
        }
        let bound = max_generalized_eigenvalue(a, b)?;
        entries.push(BoundEntry {
            k,
            mu,
            bound,
            rel_excess: (k > 0).then(|| (bound - mu) / mu),
            extension_constant: ext.exterior_energy / (mu + 1.0),
        });
    }
    Ok(UpperBoundReport {
        entries,
        unconstrained_components: unconstrained,
    })
}

fn max_generalized_eigenvalue(a: nalgebra::DMatrix<f64>, b: nalgebra::DMatrix<f64>) -> Result<f64> {
    let a = (&a + a.transpose()) * 0.5;
    let b = (&b + b.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(b).ok_or_else(|| {
        Error::NotPositiveDefinite("test functions are linearly dependent".into())
    })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite("singular Gram factor".into()))?;
    let c = &l_inv * a * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    Ok(c.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_ball_mesh, build_sphere_mesh, CollarSpec, SigmaModel};
    use crate::metric::reference_metric;

    #[test]
    fn constants_extend_to_constants() {
        let c = CollarSpec::new(SigmaModel::Circle, 0.4, 8);
        let mesh = build_sphere_mesh(2, 1, Some(&c)).unwrap();
        let g0 = reference_metric(&mesh, &[c]).unwrap();
        let ext = harmonic_extension(&mesh, &g0, &vec![1.0; mesh.num_vertices()], false).unwrap();
        for x in &ext.values {
            assert!((x - 1.0).abs() < 1e-9);
        }
        assert_eq!(ext.unconstrained_components, 0);
    }

    #[test]
    fn maximum_principle_with_dirichlet_boundary() {
        let c = CollarSpec::new(SigmaModel::Circle, 0.4, 8);
        let mesh = build_ball_mesh(2, 1, &c).unwrap();
        let g0 = reference_metric(&mesh, &[c]).unwrap();
        let ext = harmonic_extension(&mesh, &g0, &vec![1.0; mesh.num_vertices()], true).unwrap();
        for x in &ext.values {
            assert!(*x >= -1e-9 && *x <= 1.0 + 1e-9);
        }
        let on = mesh.boundary_vertices();
        assert!(ext
            .values
            .iter()
            .zip(&on)
            .filter(|(_, b)| **b)
            .all(|(x, _)| *x == 0.0));
    }
}
