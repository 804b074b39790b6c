//! PL critical points by lower-link homology.
//!
//! Vertex values are compared as `(u[v], v)`, which makes every function
//! injective on vertices without changing it. The lower link of `v` is the
//! part of its link spanned by smaller neighbours; `v` is regular when the
//! lower link is acyclic and nonempty, and otherwise has index `d + 1` where
//! `d` is the first degree of nonvanishing reduced homology (`d = -1` for an
//! empty lower link).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub vertex: usize,
    pub index: usize,
    pub value: f64,
    /// Lower link with total reduced Betti number above one.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub dim: usize,
    pub points: Vec<CriticalPoint>,
    pub counts_by_index: Vec<usize>,
    /// `sum_v sum_d (-1)^(d+1) b~_d(lower link of v)`; equals `chi(M)` on a
    /// closed manifold whether or not points are degenerate.
    pub weighted_euler_sum: i64,
    #[serde(default)]
    pub betti_reference: Vec<usize>,
    #[serde(default)]
    pub morse_pass: bool,
}

impl CriticalReport {
    pub fn num_degenerate(&self) -> usize {
        self.points.iter().filter(|p| p.degenerate).count()
    }

    /// `sum_i (-1)^i counts_by_index[i]`.
    pub fn alternating_sum(&self) -> i64 {
        self.counts_by_index
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// The points at vertices with `keep[v]`.
    pub fn restricted_to(&self, keep: &[bool]) -> Self {
        let points: Vec<CriticalPoint> = self
            .points
            .iter()
            .copied()
            .filter(|p| keep[p.vertex])
            .collect();
        let mut counts = vec![0; self.dim + 1];
        for p in &points {
            counts[p.index] += 1;
        }
        Self {
            dim: self.dim,
            points,
            counts_by_index: counts,
            weighted_euler_sum: self.weighted_euler_sum,
            betti_reference: Vec::new(),
            morse_pass: false,
        }
    }

    /// Records `betti` and the outcome of [`morse_betti_check`].
    pub fn with_betti(mut self, betti: &[usize]) -> Result<Self> {
        self.morse_pass = morse_betti_check(&self, betti)?;
        self.betti_reference = betti.to_vec();
        Ok(self)
    }
}

/// Reduced Betti numbers `b~_{-1}, b~_0, ..., b~_{n-1}` of the lower link.
fn lower_link_betti(mesh: &SimplicialMesh, u: &[f64], v: usize, interior: bool) -> Vec<usize> {
    let n = mesh.dim;
    let below = |w: usize| (u[w], w) < (u[v], v);
    let cells = mesh.vertex_cells(v);
    let mut verts: Vec<usize> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut triangles = 0usize;
    let mut full_top = true;
    for &c in cells {
        let opp: Vec<usize> = mesh.cells[c].iter().copied().filter(|&w| w != v).collect();
        let low: Vec<usize> = opp.iter().copied().filter(|&w| below(w)).collect();
        full_top &= low.len() == opp.len();
        verts.extend(&low);
        for i in 0..low.len() {
            for j in i + 1..low.len() {
                let (a, b) = (low[i].min(low[j]), low[i].max(low[j]));
                edges.push((a, b));
            }
        }
        if n == 3 && low.len() == 3 {
            triangles += 1;
        }
    }
    verts.sort_unstable();
    verts.dedup();
    edges.sort_unstable();
    edges.dedup();
    let mut betti = vec![0usize; n + 1];
    if verts.is_empty() {
        betti[0] = 1;
        return betti;
    }
    let mut uf = UnionFind::new(verts.len());
    let pos = |w: usize| {
        verts
            .binary_search(&w)
            .expect("edge endpoint in lower link")
    };
    for &(a, b) in &edges {
        uf.union(pos(a), pos(b));
    }
    let (_, components) = uf.labels(|_| true);
    betti[1] = components - 1;
    let top = usize::from(interior && full_top);
    match n {
        2 => betti[2] = top,
        3 => {
            let chi = verts.len() as i64 - edges.len() as i64 + triangles as i64;
            betti[3] = top;
            betti[2] = (components as i64 + top as i64 - chi).max(0) as usize;
        }
        _ => unreachable!("dimension checked by caller"),
    }
    betti
}

/// Classifies every vertex of `mesh` for the PL function `u`.
pub fn classify_critical_vertices(mesh: &SimplicialMesh, u: &[f64]) -> Result<CriticalReport> {
    let n = mesh.dim;
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidArgument(format!(
            "dimension {n} not supported"
        )));
    }
    if u.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(
            "function must have one value per vertex".into(),
        ));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "function has non-finite values".into(),
        ));
    }
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if hi <= lo {
        return Err(Error::ConstantFunction);
    }
    let on_boundary = mesh.boundary_vertices();
    let classify = |v: usize| lower_link_betti(mesh, u, v, !on_boundary[v]);
    let vs: Vec<usize> = (0..mesh.num_vertices()).collect();
    #[cfg(feature = "parallel")]
    let bettis: Vec<Vec<usize>> = {
        use rayon::prelude::*;
        vs.par_iter().map(|&v| classify(v)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let bettis: Vec<Vec<usize>> = vs.iter().map(|&v| classify(v)).collect();

    let mut points = Vec::new();
    let mut counts = vec![0; n + 1];
    let mut weighted = 0i64;
    for (v, b) in bettis.iter().enumerate() {
        for (d, &x) in b.iter().enumerate() {
            weighted += if d % 2 == 0 { x as i64 } else { -(x as i64) };
        }
        if let Some(index) = b.iter().position(|&x| x > 0) {
            counts[index] += 1;
            points.push(CriticalPoint {
                vertex: v,
                index,
                value: u[v],
                degenerate: b.iter().sum::<usize>() > 1,
            });
        }
    }
    Ok(CriticalReport {
        dim: n,
        points,
        counts_by_index: counts,
        weighted_euler_sum: weighted,
        betti_reference: Vec::new(),
        morse_pass: false,
    })
}

/// Passes iff `counts_by_index[i] >= betti[i]` for `0 <= i < n`.
pub fn morse_betti_check(report: &CriticalReport, betti: &[usize]) -> Result<bool> {
    if betti.len() != report.dim + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} Betti numbers, got {}",
            report.dim + 1,
            betti.len()
        )));
    }
    Ok((0..report.dim).all(|i| report.counts_by_index[i] >= betti[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sphere_mesh, kuhn_torus};

    fn height(m: &SimplicialMesh) -> Vec<f64> {
        m.coords.iter().map(|p| p[2]).collect()
    }

    #[test]
    fn sphere_height() {
        for refinement in [2, 3] {
            let m = build_sphere_mesh(2, refinement, None).unwrap();
            let r = classify_critical_vertices(&m, &height(&m)).unwrap();
            assert_eq!(r.counts_by_index, vec![1, 0, 1]);
            assert_eq!(r.alternating_sum(), 2);
            assert_eq!(r.weighted_euler_sum, 2);
        }
    }

    fn doughnut_height(div: usize) -> (SimplicialMesh, Vec<f64>) {
        let m = kuhn_torus(2, div, 1.0).unwrap();
        let tau = std::f64::consts::TAU;
        let u = m
            .coords
            .iter()
            .map(|p| {
                let (theta, phi) = (tau * p[0], tau * p[1]);
                // axis of revolution is z; the height is x, slightly tilted
                let (x, y) = (
                    (2.0 + phi.cos()) * theta.cos(),
                    (2.0 + phi.cos()) * theta.sin(),
                );
                x + 0.013 * y + 0.007 * phi.sin()
            })
            .collect();
        (m, u)
    }

    #[test]
    fn torus_height() {
        for div in [16, 32] {
            let (m, u) = doughnut_height(div);
            let r = classify_critical_vertices(&m, &u).unwrap();
            assert_eq!(r.counts_by_index, vec![1, 2, 1], "div {div}");
            assert_eq!(r.num_degenerate(), 0);
            assert_eq!(r.alternating_sum(), 0);
        }
    }

    #[test]
    fn s3_and_t3_euler_relation() {
        let m = build_sphere_mesh(3, 1, None).unwrap();
        let u: Vec<f64> = m.coords.iter().map(|p| p[0] + 0.3 * p[1] * p[3]).collect();
        let r = classify_critical_vertices(&m, &u).unwrap();
        assert_eq!(r.weighted_euler_sum, 0);
        if r.num_degenerate() == 0 {
            assert_eq!(r.alternating_sum(), 0);
        }
        assert!(r.counts_by_index[0] >= 1 && r.counts_by_index[3] >= 1);

        let m = kuhn_torus(3, 6, 1.0).unwrap();
        let tau = std::f64::consts::TAU;
        let u: Vec<f64> = m
            .coords
            .iter()
            .map(|p| (tau * p[0]).cos() + 0.9 * (tau * p[1]).cos() + 0.8 * (tau * p[2]).cos())
            .collect();
        let r = classify_critical_vertices(&m, &u).unwrap();
        assert_eq!(r.weighted_euler_sum, 0);
        assert_eq!(r.counts_by_index, vec![1, 3, 3, 1]);
    }

    #[test]
    fn ties_and_noise() {
        let m = build_sphere_mesh(2, 2, None).unwrap();
        assert!(matches!(
            classify_critical_vertices(&m, &vec![1.5; m.num_vertices()]),
            Err(Error::ConstantFunction)
        ));
        let u = height(&m);
        let base = classify_critical_vertices(&m, &u).unwrap();
        let noisy: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(i, x)| x + 1e-12 * i as f64 / u.len() as f64)
            .collect();
        assert_eq!(
            classify_critical_vertices(&m, &noisy)
                .unwrap()
                .counts_by_index,
            base.counts_by_index
        );
    }

    #[test]
    fn betti_check() {
        let report = |counts: Vec<usize>| CriticalReport {
            dim: 2,
            points: Vec::new(),
            counts_by_index: counts,
            weighted_euler_sum: 0,
            betti_reference: Vec::new(),
            morse_pass: false,
        };
        assert!(morse_betti_check(&report(vec![1, 1, 0]), &[1, 1, 0]).unwrap());
        assert!(!morse_betti_check(&report(vec![1, 0, 0]), &[1, 1, 0]).unwrap());
        assert!(morse_betti_check(&report(vec![1, 0, 0]), &[1, 1]).is_err());
        let r = report(vec![1, 1, 0]).with_betti(&[1, 1, 0]).unwrap();
        assert!(r.morse_pass && r.betti_reference == vec![1, 1, 0]);
    }
}
