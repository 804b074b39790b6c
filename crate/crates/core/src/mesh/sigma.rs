//! Hypersurface triangulations used as collar cross-sections, plus the
//! closed model complexes built by subdivision.

use std::collections::HashMap;

use super::{sorted_pair, SigmaModel};

/// A closed triangulated hypersurface `Sigma` of dimension `dim`.
///
/// Round models store unit vectors (points of `S^dim` in `R^(dim+1)`); the
/// flat torus stores chart coordinates already scaled by `r` together with
/// its periods.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMesh {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    pub model: SigmaModel,
    /// Periods of a flat model; empty for round models.
    pub periods: Vec<f64>,
}

impl SigmaMesh {
    /// Regular polygon on the unit circle.
    pub fn circle(segments: usize) -> Self {
        let points = (0..segments)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let cells = (0..segments).map(|i| vec![i, (i + 1) % segments]).collect();
        Self {
            dim: 1,
            points,
            cells,
            model: SigmaModel::Circle,
            periods: Vec::new(),
        }
    }

    /// Icosahedron with `refinement` rounds of 4-to-1 midpoint subdivision,
    /// projected to the unit sphere.
    pub fn icosphere(refinement: usize) -> Self {
        let (points, cells) = icosphere(refinement);
        Self {
            dim: 2,
            points,
            cells,
            model: SigmaModel::Sphere2,
            periods: Vec::new(),
        }
    }

    /// Circle of circumference `2 pi r` in a periodic chart.
    pub fn flat_circle(segments: usize, r: f64) -> Self {
        let period = 2.0 * std::f64::consts::PI * r;
        let h = period / segments as f64;
        Self {
            dim: 1,
            points: (0..segments).map(|i| vec![i as f64 * h]).collect(),
            cells: (0..segments).map(|i| vec![i, (i + 1) % segments]).collect(),
            model: SigmaModel::Circle,
            periods: vec![period],
        }
    }

    /// Flat square torus with periods `2 pi r`, `m x m` squares each split
    /// into two triangles along the same diagonal.
    pub fn flat_torus(m: usize, r: f64) -> Self {
        let period = 2.0 * std::f64::consts::PI * r;
        let h = period / m as f64;
        let id = |i: usize, j: usize| (i % m) * m + (j % m);
        let mut points = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                points.push(vec![i as f64 * h, j as f64 * h]);
            }
        }
        let mut cells = Vec::with_capacity(2 * m * m);
        for i in 0..m {
            for j in 0..m {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self {
            dim: 2,
            points,
            cells,
            model: SigmaModel::Torus2,
            periods: vec![period, period],
        }
    }

    /// User-supplied closed triangulation whose points lie on the unit
    /// sphere of `R^(dim+1)`.
    pub fn custom(dim: usize, points: Vec<Vec<f64>>, cells: Vec<Vec<usize>>) -> Self {
        Self {
            dim,
            points,
            cells,
            model: SigmaModel::Custom,
            periods: Vec::new(),
        }
    }

    pub fn is_flat(&self) -> bool {
        !self.periods.is_empty()
    }

    /// Mean edge length relative to the unit model (round) or in chart
    /// units (flat).
    pub fn mean_edge_length(&self) -> f64 {
        let mut seen = std::collections::HashSet::new();
        let mut total = 0.0;
        for c in &self.cells {
            for a in 0..c.len() {
                for b in a + 1..c.len() {
                    if seen.insert(sorted_pair(c[a], c[b])) {
                        total += super::periodic_distance(
                            &self.points[c[a]],
                            &self.points[c[b]],
                            &self.periods,
                        );
                    }
                }
            }
        }
        total / seen.len().max(1) as f64
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

fn icosphere(refinement: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut points: Vec<Vec<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| {
        let mut v = p.to_vec();
        normalize(&mut v);
        v
    })
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..refinement {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, points: &mut Vec<Vec<f64>>| -> usize {
            *mid.entry(sorted_pair(a, b)).or_insert_with(|| {
                let mut m: Vec<f64> = points[a]
                    .iter()
                    .zip(&points[b])
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect();
                normalize(&mut m);
                points.push(m);
                points.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut points);
            let bc = midpoint(b, c, &mut points);
            let ca = midpoint(c, a, &mut points);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (points, faces.into_iter().map(|f| f.to_vec()).collect())
}

/// Boundary of the 4-dimensional cross-polytope (16 tetrahedra), refined by
/// `refinement` rounds of red (1-to-8) subdivision with the interior
/// octahedron split along its shortest diagonal, projected to the unit
/// 3-sphere.
pub(crate) fn cross_polytope_s3(refinement: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let mut points = Vec::new();
    for axis in 0..4 {
        for sign in [1.0, -1.0] {
            let mut p = vec![0.0; 4];
            p[axis] = sign;
            points.push(p);
        }
    }
    let mut cells = Vec::new();
    for mask in 0..16usize {
        cells.push(
            (0..4)
                .map(|axis| 2 * axis + ((mask >> axis) & 1))
                .collect::<Vec<usize>>(),
        );
    }
    for _ in 0..refinement {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, points: &mut Vec<Vec<f64>>| -> usize {
            *mid.entry(sorted_pair(a, b)).or_insert_with(|| {
                let mut m: Vec<f64> = points[a]
                    .iter()
                    .zip(&points[b])
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect();
                normalize(&mut m);
                points.push(m);
                points.len() - 1
            })
        };
        let mut next = Vec::with_capacity(cells.len() * 8);
        for cell in &cells {
            let v = [cell[0], cell[1], cell[2], cell[3]];
            let m01 = midpoint(v[0], v[1], &mut points);
            let m02 = midpoint(v[0], v[2], &mut points);
            let m03 = midpoint(v[0], v[3], &mut points);
            let m12 = midpoint(v[1], v[2], &mut points);
            let m13 = midpoint(v[1], v[3], &mut points);
            let m23 = midpoint(v[2], v[3], &mut points);
            next.push(vec![v[0], m01, m02, m03]);
            next.push(vec![v[1], m01, m12, m13]);
            next.push(vec![v[2], m02, m12, m23]);
            next.push(vec![v[3], m03, m13, m23]);
            // octahedron with opposite pairs (m01,m23), (m02,m13), (m03,m12)
            let diagonals = [(m01, m23), (m02, m13), (m03, m12)];
            let (k, _) = diagonals
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (k, super::euclid(&points[a], &points[b])))
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                );
            let (a, b) = diagonals[k];
            let ring: Vec<usize> = match k {
                0 => vec![m02, m03, m13, m12],
                1 => vec![m01, m03, m23, m12],
                _ => vec![m01, m02, m23, m13],
            };
            for i in 0..4 {
                next.push(vec![a, b, ring[i], ring[(i + 1) % 4]]);
            }
        }
        cells = next;
    }
    (points, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let s = SigmaMesh::icosphere(0);
        assert_eq!((s.points.len(), s.cells.len()), (12, 20));
        let s = SigmaMesh::icosphere(2);
        assert_eq!((s.points.len(), s.cells.len()), (162, 320));
        for p in &s.points {
            let n: f64 = p.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cross_polytope_counts() {
        let (p, c) = cross_polytope_s3(0);
        assert_eq!((p.len(), c.len()), (8, 16));
        let (p, c) = cross_polytope_s3(1);
        // 8 vertices + 24 edge midpoints; 16 * 8 cells
        assert_eq!((p.len(), c.len()), (32, 128));
    }

    #[test]
    fn flat_torus_counts() {
        let t = SigmaMesh::flat_torus(5, 0.4);
        assert_eq!(t.points.len(), 25);
        assert_eq!(t.cells.len(), 50);
        assert!((t.periods[0] - 2.0 * std::f64::consts::PI * 0.4).abs() < 1e-15);
    }
}
