//! Compressed sparse row storage for the assembled operators.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sorted sparsity pattern per row.
    pub fn from_pattern(nrows: usize, ncols: usize, rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed
    /// in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nrows];
        for &(r, c, _) in triplets {
            rows[r].push(c);
        }
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
        }
        let mut m = Self::from_pattern(nrows, ncols, &rows);
        for &(r, c, v) in triplets {
            m.add(r, c, v);
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[lo..hi]
            .binary_search(&col)
            .ok()
            .map(|p| lo + p)
    }

    /// Adds `v` to an entry of the pattern. Panics if the entry is outside it.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let p = self
            .position(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) outside sparsity pattern"));
        self.values[p] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |p| self.values[p])
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`. Each row is reduced sequentially, so the result does not
    /// depend on the thread count.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row_dot = |i: usize| -> f64 {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for p in lo..hi {
                s += self.values[p] * x[self.col_idx[p]];
            }
            s
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if self.nnz() > 200_000 {
                y.par_iter_mut()
                    .enumerate()
                    .for_each(|(i, yi)| *yi = row_dot(i));
                return;
            }
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = row_dot(i);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Restriction to the rows and columns listed in `keep` (in that order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![usize::MAX; self.ncols];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &i in keep {
            for (j, v) in self.row(i) {
                if new_index[j] != usize::MAX {
                    col_idx.push(new_index[j]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: keep.len(),
            ncols: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Coordinate text format: a header line `nrows ncols nnz` followed by
    /// one `row col value` line per stored entry, 0-based.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                s.push_str(&format!("{i} {j} {v:.17e}\n"));
            }
        }
        s
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or("empty matrix text")?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| format!("bad header: {e}")))
            .collect::<Result<_, _>>()?;
        if h.len() != 3 {
            return Err("header must be `nrows ncols nnz`".into());
        }
        let mut triplets = Vec::with_capacity(h[2]);
        for line in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(format!("bad entry line `{line}`"));
            }
            let r = t[0].parse().map_err(|e| format!("{e}"))?;
            let c = t[1].parse().map_err(|e| format!("{e}"))?;
            let v = t[2].parse().map_err(|e| format!("{e}"))?;
            triplets.push((r, c, v));
        }
        if triplets.len() != h[2] {
            return Err(format!(
                "expected {} entries, found {}",
                h[2],
                triplets.len()
            ));
        }
        Ok(Self::from_triplets(h[0], h[1], &triplets))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for an SPD matrix.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, String> {
    let n = a.nrows;
    let diag = a.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err("non-positive diagonal in CG system".into());
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r: Vec<f64> = {
        let ax = a.mul_vec(&x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    if norm2(&r) <= rel_tol * bnorm {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err("matrix is not positive definite".into());
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= rel_tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(format!(
        "CG did not reach relative residual {rel_tol:e} in {max_iter} iterations"
    ))
}
