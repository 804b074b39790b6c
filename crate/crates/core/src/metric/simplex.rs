//! Euclidean geometry of a single simplex given only its edge lengths.
//!
//! Lengths are passed in [`local_pairs`](crate::mesh::local_pairs) order.

use nalgebra::DMatrix;

fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    crate::mesh::local_pairs(dim)
        .iter()
        .position(|&p| p == (i, j))
        .expect("vertex pair within simplex")
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Squared `dim`-volume from the bordered Cayley-Menger determinant.
/// Non-positive values mean the lengths do not bound a Euclidean simplex.
pub fn cayley_menger_volume(dim: usize, lengths: &[f64]) -> f64 {
    let m = dim + 2;
    let mut cm = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        cm[(0, k)] = 1.0;
        cm[(k, 0)] = 1.0;
    }
    for i in 0..=dim {
        for j in i + 1..=dim {
            let d2 = lengths[pair_index(dim, i, j)].powi(2);
            cm[(i + 1, j + 1)] = d2;
            cm[(j + 1, i + 1)] = d2;
        }
    }
    let sign = if dim.is_multiple_of(2) { -1.0 } else { 1.0 };
    sign * cm.determinant() / (2f64.powi(dim as i32) * factorial(dim).powi(2))
}

/// Gram matrix of the edge vectors from vertex 0, stored in the leading
/// `dim x dim` block.
pub fn gram(dim: usize, lengths: &[f64]) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    let sq = |i: usize, j: usize| lengths[pair_index(dim, i, j)].powi(2);
    for i in 1..=dim {
        for j in i..=dim {
            let v = if i == j {
                sq(0, i)
            } else {
                0.5 * (sq(0, i) + sq(0, j) - sq(i, j))
            };
            g[i - 1][j - 1] = v;
            g[j - 1][i - 1] = v;
        }
    }
    g
}

pub fn det(dim: usize, g: &[[f64; 3]; 3]) -> f64 {
    match dim {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
        _ => panic!("unsupported simplex dimension {dim}"),
    }
}

/// Inverse of a symmetric Gram block with known determinant.
pub fn inverse(dim: usize, g: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    match dim {
        1 => inv[0][0] = 1.0 / det,
        2 => {
            inv[0][0] = g[1][1] / det;
            inv[1][1] = g[0][0] / det;
            inv[0][1] = -g[0][1] / det;
            inv[1][0] = inv[0][1];
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                    let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i][j] = (g[i1][j1] * g[i2][j2] - g[i1][j2] * g[i2][j1]) / det;
                }
            }
        }
        _ => panic!("unsupported simplex dimension {dim}"),
    }
    inv
}

/// Squared volume via the Gram determinant (`det G / (n!)^2`).
pub fn sq_volume(dim: usize, lengths: &[f64]) -> f64 {
    det(dim, &gram(dim, lengths)) / factorial(dim).powi(2)
}

/// Shape regularity `n * inradius / circumradius`: 1 for the regular
/// simplex, 0 for a degenerate one.
pub fn quality(dim: usize, lengths: &[f64]) -> f64 {
    if dim == 1 {
        return 1.0;
    }
    let g = gram(dim, lengths);
    let d = det(dim, &g);
    if !(d > 0.0) {
        return 0.0;
    }
    let volume = d.sqrt() / factorial(dim);
    let facet_area: f64 = (0..=dim)
        .map(|skip| {
            let verts: Vec<usize> = (0..=dim).filter(|&k| k != skip).collect();
            let sub: Vec<f64> = crate::mesh::local_pairs(dim - 1)
                .iter()
                .map(|&(a, b)| lengths[pair_index(dim, verts[a], verts[b])])
                .collect();
            if dim == 2 {
                sub[0]
            } else {
                sq_volume(dim - 1, &sub).max(0.0).sqrt()
            }
        })
        .sum();
    let inradius = dim as f64 * volume / facet_area;
    // circumcentre c = sum a_j e_j with G a = diag(G) / 2
    let inv = inverse(dim, &g, d);
    let mut r2 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            r2 += g[i][i] * inv[i][j] * g[j][j];
        }
    }
    let circumradius = (0.25 * r2).sqrt();
    dim as f64 * inradius / circumradius
}

/// Squared distance between two points of the simplex given by barycentric
/// weights `a` and `b` (length `dim + 1`).
pub fn barycentric_sq_distance(dim: usize, g: &[[f64; 3]; 3], a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += (a[i + 1] - b[i + 1]) * g[i][j] * (a[j + 1] - b[j + 1]);
        }
    }
    s.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cayley_menger_examples() {
        assert_relative_eq!(
            cayley_menger_volume(2, &[1.0, 1.0, 1.0]),
            3.0 / 16.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            cayley_menger_volume(3, &[1.0; 6]),
            1.0 / 72.0,
            epsilon = 1e-14
        );
        assert!(cayley_menger_volume(2, &[1.0, 1.0, 2.0]).abs() < 1e-14);
        assert_relative_eq!(
            cayley_menger_volume(2, &[1.0, 1.0, 1.0]).sqrt(),
            0.43301,
            epsilon = 1e-5
        );
        assert_relative_eq!(
            cayley_menger_volume(3, &[1.0; 6]).sqrt(),
            0.11785,
            epsilon = 1e-5
        );
    }

    #[test]
    fn gram_route_matches() {
        let l = [1.0, 1.2, 0.9, 1.1, 1.3, 0.8];
        assert_relative_eq!(
            sq_volume(3, &l),
            cayley_menger_volume(3, &l),
            epsilon = 1e-13
        );
    }

    #[test]
    fn quality_of_regular_and_flat() {
        assert_relative_eq!(quality(2, &[1.0; 3]), 1.0, epsilon = 1e-12);
        assert_relative_eq!(quality(3, &[2.0; 6]), 1.0, epsilon = 1e-12);
        assert_eq!(quality(2, &[1.0, 1.0, 2.0]), 0.0);
        // right isosceles triangle: r = (2 - sqrt 2)/2, R = sqrt 2 / 2
        let q = quality(2, &[1.0, 1.0, 2f64.sqrt()]);
        assert_relative_eq!(q, 2.0 * (2.0 - 2f64.sqrt()) / 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn inverse_is_inverse() {
        let g = gram(3, &[1.0, 1.2, 0.9, 1.1, 1.3, 0.8]);
        let d = det(3, &g);
        let inv = inverse(3, &g, d);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| g[i][k] * inv[k][j]).sum();
                assert_relative_eq!(s, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }
}
