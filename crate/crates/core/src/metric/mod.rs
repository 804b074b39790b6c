//! Piecewise-flat metrics: the reference metric `g0`, its degeneration
//! `g_eps` (`eps g0` outside the collars) and conformal smoothings of it.
//!
//! A metric stores one length per mesh edge plus one conformal factor per
//! cell; the realized length of an edge inside a cell is `length *
//! sqrt(factor)`. The reference and smoothed metrics use unit factors. The
//! degenerate metric keeps the reference lengths and puts `eps` on every
//! exterior cell, which is exactly `g_eps` cell by cell.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{CollarSpec, Region, SimplicialMesh};

pub use simplex::cayley_menger_volume;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    ReferenceG0,
    Degenerate { eps: f64 },
    Smoothed { eps: f64, delta: f64, order: u32 },
    Scaled { factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLengthMetric {
    /// One length per edge of the mesh, indexed like `mesh.edges()`.
    pub lengths: Vec<f64>,
    /// Conformal factor per cell.
    pub cell_factor: Vec<f64>,
    pub provenance: Provenance,
}

impl EdgeLengthMetric {
    /// Realized edge lengths of one cell in `local_pairs` order.
    pub fn cell_lengths(&self, mesh: &SimplicialMesh, cell: usize) -> Vec<f64> {
        let f = self.cell_factor[cell].sqrt();
        mesh.cell_edges(cell)
            .iter()
            .map(|&e| self.lengths[e] * f)
            .collect()
    }

    /// Length of an edge as seen from the closure of the collars: the
    /// largest realized length over the incident cells.
    pub fn edge_length(&self, mesh: &SimplicialMesh, edge: usize) -> f64 {
        let [a, b] = mesh.edges()[edge];
        let factor = mesh
            .vertex_cells(a)
            .iter()
            .filter(|&&c| mesh.cells[c].contains(&b))
            .map(|&c| self.cell_factor[c])
            .fold(0.0, f64::max);
        self.lengths[edge] * factor.sqrt()
    }

    /// All readout lengths as `(i, j, length)` with `i < j`.
    pub fn to_triples(&self, mesh: &SimplicialMesh) -> Vec<(usize, usize, f64)> {
        mesh.edges()
            .iter()
            .enumerate()
            .map(|(e, &[a, b])| (a, b, self.edge_length(mesh, e)))
            .collect()
    }

    /// Uniform scaling of every length by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lengths: self.lengths.iter().map(|l| l * c).collect(),
            cell_factor: self.cell_factor.clone(),
            provenance: Provenance::Scaled { factor: c },
        }
    }

    /// Checks that every cell is a non-degenerate Euclidean simplex.
    pub fn check_realizable(&self, mesh: &SimplicialMesh) -> Result<()> {
        if self.lengths.len() != mesh.edges().len() || self.cell_factor.len() != mesh.num_cells() {
            return Err(Error::InvalidArgument(
                "metric does not match the mesh".into(),
            ));
        }
        for c in 0..mesh.num_cells() {
            let v2 = cayley_menger_volume(mesh.dim, &self.cell_lengths(mesh, c));
            let scale = self
                .cell_lengths(mesh, c)
                .iter()
                .fold(0.0f64, |m, l| m.max(*l));
            if !(v2 > 1e-14 * scale.powi(2 * mesh.dim as i32)) {
                return Err(Error::Unrealizable {
                    cell: c,
                    sq_volume: v2,
                });
            }
        }
        Ok(())
    }
}

/// Reference metric `g0` read off the mesh geometry. Inside collar `i` this
/// is `Gamma_i^2 dx^2 + r^2 g_Sigma` because the generators lay collar
/// layers at arclength spacing `Gamma_i dx`.
pub fn reference_metric(mesh: &SimplicialMesh, collars: &[CollarSpec]) -> Result<EdgeLengthMetric> {
    for (c, region) in mesh.region.iter().enumerate() {
        if let Region::Collar(i) = region {
            if !collars.iter().any(|s| s.label == *i) {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} belongs to collar {i}, which has no CollarSpec"
                )));
            }
        }
    }
    let lengths = mesh
        .edges()
        .iter()
        .map(|&[a, b]| mesh.coordinate_length(a, b))
        .collect();
    let metric = EdgeLengthMetric {
        lengths,
        cell_factor: vec![1.0; mesh.num_cells()],
        provenance: Provenance::ReferenceG0,
    };
    metric.check_realizable(mesh)?;
    Ok(metric)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1], got {eps}"
        )))
    }
}

/// `g_eps`: reference lengths with conformal factor `eps` on every
/// non-collar cell.
pub fn degenerate_metric(
    reference: &EdgeLengthMetric,
    mesh: &SimplicialMesh,
    eps: f64,
) -> Result<EdgeLengthMetric> {
    check_eps(eps)?;
    let cell_factor = mesh
        .region
        .iter()
        .zip(&reference.cell_factor)
        .map(|(r, f)| match r {
            Region::Collar(_) => *f,
            _ => f * eps,
        })
        .collect();
    let metric = EdgeLengthMetric {
        lengths: reference.lengths.clone(),
        cell_factor,
        provenance: Provenance::Degenerate { eps },
    };
    metric.check_realizable(mesh)?;
    Ok(metric)
}

/// Edge-wise degeneration: every edge not contained in the closed collar is
/// scaled by `sqrt(eps)` (straddling edges take the sharp profile at their
/// midpoint, which is `eps`). Exterior cells that touch the collar then mix
/// scaled and unscaled edges, so this fails the realizability check once
/// `eps` is small.
pub fn degenerate_metric_edgewise(
    reference: &EdgeLengthMetric,
    mesh: &SimplicialMesh,
    eps: f64,
) -> Result<EdgeLengthMetric> {
    check_eps(eps)?;
    let in_collar = closed_collar_edges(mesh);
    let s = eps.sqrt();
    let lengths = reference
        .lengths
        .iter()
        .zip(&in_collar)
        .map(|(l, &inside)| if inside { *l } else { l * s })
        .collect();
    let metric = EdgeLengthMetric {
        lengths,
        cell_factor: reference.cell_factor.clone(),
        provenance: Provenance::Degenerate { eps },
    };
    metric.check_realizable(mesh)?;
    Ok(metric)
}

/// Edges contained in some collar cell.
fn closed_collar_edges(mesh: &SimplicialMesh) -> Vec<bool> {
    let mut inside = vec![false; mesh.edges().len()];
    for c in 0..mesh.num_cells() {
        if mesh.region[c].collar_index().is_some() {
            for &e in mesh.cell_edges(c) {
                inside[e] = true;
            }
        }
    }
    inside
}

/// Monotone transition from 1 on the closed collar to `eps` beyond
/// distance `delta`, a polynomial smoothstep with `order` vanishing
/// derivatives at both junctions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProfile {
    pub eps: f64,
    pub delta: f64,
    pub order: u32,
}

impl SmoothingProfile {
    pub fn new(eps: f64, delta: f64, order: u32) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in (0, 1), got {eps}"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if order < 2 {
            return Err(Error::InvalidArgument(
                "smoothing order must be at least 2".into(),
            ));
        }
        Ok(Self { eps, delta, order })
    }

    /// Conformal factor at distance `d >= 0` from the collar.
    pub fn value(&self, d: f64) -> f64 {
        let t = (d / self.delta).clamp(0.0, 1.0);
        self.eps + (1.0 - self.eps) * (1.0 - smoothstep(self.order, t))
    }
}

/// Generalized smoothstep of degree `2N + 1`: `S(0) = 0`, `S(1) = 1`, first
/// `N` derivatives zero at both ends.
pub fn smoothstep(n: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let n = n as u64;
    let mut s = 0.0;
    for i in 0..=n {
        s += binomial(n + i, i) * binomial(2 * n + 1, n - i) * (-t).powi(i as i32);
    }
    s * t.powi(n as i32 + 1)
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `chi g0` with `chi` evaluated at the mean exterior depth of each edge's
/// endpoints.
pub fn smoothed_metric(
    reference: &EdgeLengthMetric,
    mesh: &SimplicialMesh,
    profile: &SmoothingProfile,
) -> Result<EdgeLengthMetric> {
    let lengths = mesh
        .edges()
        .iter()
        .zip(&reference.lengths)
        .map(|(&[a, b], l)| {
            let d = 0.5 * (mesh.exterior_depth[a] + mesh.exterior_depth[b]);
            l * profile.value(d).sqrt()
        })
        .collect();
    let metric = EdgeLengthMetric {
        lengths,
        cell_factor: reference.cell_factor.clone(),
        provenance: Provenance::Smoothed {
            eps: profile.eps,
            delta: profile.delta,
            order: profile.order,
        },
    };
    metric.check_realizable(mesh)?;
    Ok(metric)
}

/// Largest absolute difference between the readout lengths of two metrics.
pub fn max_length_deviation(
    a: &EdgeLengthMetric,
    b: &EdgeLengthMetric,
    mesh: &SimplicialMesh,
) -> f64 {
    (0..mesh.edges().len())
        .map(|e| (a.edge_length(mesh, e) - b.edge_length(mesh, e)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sphere_mesh, CollarSpec, SigmaModel};
    use approx::assert_relative_eq;

    fn capsule() -> (SimplicialMesh, CollarSpec) {
        let c = CollarSpec::new(SigmaModel::Circle, 0.4, 10);
        (build_sphere_mesh(2, 1, Some(&c)).unwrap(), c)
    }

    #[test]
    fn collar_edge_lengths() {
        let (m, c) = capsule();
        let g0 = reference_metric(&m, std::slice::from_ref(&c)).unwrap();
        let find = |x0: f64, x1: f64| {
            m.edges()
                .iter()
                .position(|&[a, b]| {
                    let (xa, xb) = (m.collar_x[a], m.collar_x[b]);
                    matches!((xa, xb), (Some(p), Some(q)) if ((p - x0).abs() < 1e-12 && (q - x1).abs() < 1e-12)
                        || ((p - x1).abs() < 1e-12 && (q - x0).abs() < 1e-12))
                        && m.coords[a][..2] == m.coords[b][..2]
                })
                .unwrap()
        };
        assert_relative_eq!(g0.lengths[find(0.0, 0.2)], 0.2, epsilon = 1e-12);
        // intra-layer chord on the circle of radius 0.4, 16 segments
        let e = m
            .edges()
            .iter()
            .position(|&[a, b]| m.collar_x[a] == Some(0.0) && m.collar_x[b] == Some(0.0))
            .unwrap();
        let theta = 2.0 * std::f64::consts::PI / 16.0;
        assert_relative_eq!(
            g0.lengths[e],
            0.4 * 2.0 * (theta / 2.0).sin(),
            epsilon = 1e-12
        );

        let c8 = c.clone().with_gamma(0.8);
        let m8 = build_sphere_mesh(2, 1, Some(&c8)).unwrap();
        let g8 = reference_metric(&m8, &[c8]).unwrap();
        let e = m8
            .edges()
            .iter()
            .position(|&[a, b]| {
                m8.collar_x[a]
                    .zip(m8.collar_x[b])
                    .is_some_and(|(p, q)| (p - q).abs() > 0.1)
                    && m8.coords[a][..2] == m8.coords[b][..2]
            })
            .unwrap();
        assert_relative_eq!(g8.lengths[e], 0.16, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_scaling() {
        let (m, c) = capsule();
        let g0 = reference_metric(&m, &[c]).unwrap();
        let same = degenerate_metric(&g0, &m, 1.0).unwrap();
        assert_eq!(max_length_deviation(&same, &g0, &m), 0.0);
        let g = degenerate_metric(&g0, &m, 0.04).unwrap();
        let inside = closed_collar_edges(&m);
        for e in 0..m.edges().len() {
            let expect = if inside[e] {
                g0.lengths[e]
            } else {
                0.2 * g0.lengths[e]
            };
            assert_relative_eq!(g.edge_length(&m, e), expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn edgewise_degeneration_breaks() {
        let (m, c) = capsule();
        let g0 = reference_metric(&m, &[c]).unwrap();
        assert!(matches!(
            degenerate_metric_edgewise(&g0, &m, 1e-6),
            Err(Error::Unrealizable { .. })
        ));
        assert!(degenerate_metric(&g0, &m, 1e-6).is_ok());
    }

    #[test]
    fn profile_shape() {
        let p = SmoothingProfile::new(0.1, 0.5, 2).unwrap();
        assert_eq!(p.value(0.0), 1.0);
        assert_relative_eq!(p.value(0.5), 0.1, epsilon = 1e-15);
        assert_relative_eq!(p.value(0.25), 0.55, epsilon = 1e-12);
        let mut last = 1.0;
        for k in 1..=100 {
            let v = p.value(0.006 * k as f64);
            assert!(v <= last);
            last = v;
        }
        assert!(SmoothingProfile::new(0.1, 0.5, 1).is_err());
    }

    #[test]
    fn smoothing_converges_to_degenerate() {
        let (m, c) = capsule();
        let g0 = reference_metric(&m, &[c]).unwrap();
        let eps = 0.5;
        let sharp = degenerate_metric(&g0, &m, eps).unwrap();
        let mut last = f64::INFINITY;
        for delta in [0.8, 0.4, 0.2] {
            let p = SmoothingProfile::new(eps, delta, 2).unwrap();
            let s = smoothed_metric(&g0, &m, &p).unwrap();
            let d = max_length_deviation(&s, &sharp, &m);
            assert!(d < last, "{d} >= {last}");
            last = d;
        }
    }
}
