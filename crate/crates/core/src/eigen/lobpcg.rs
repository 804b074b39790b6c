use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finish, EigenResult};
use crate::error::{Error, Result};
use crate::fem::OperatorPair;
use crate::sparse::CsrMatrix;

fn apply(a: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut y = DMatrix::zeros(a.nrows, x.ncols());
    for j in 0..x.ncols() {
        let src = &x.as_slice()[j * n..(j + 1) * n];
        let rows = a.nrows;
        a.mul_vec_into(src, &mut y.as_mut_slice()[j * rows..(j + 1) * rows]);
    }
    y
}

struct Ritz {
    x: DMatrix<f64>,
    kx: DMatrix<f64>,
    mx: DMatrix<f64>,
    theta: Vec<f64>,
}

/// Rayleigh-Ritz on `span(S)`, returning the lowest `m` Ritz pairs. The
/// basis is M-orthonormalized by an eigen-decomposition of its scaled Gram
/// matrix, dropping numerically dependent directions.
fn rayleigh_ritz(ops: &OperatorPair, s: &DMatrix<f64>, m: usize) -> Result<Ritz> {
    let ks = apply(&ops.stiffness, s);
    let ms = apply(&ops.mass, s);
    let g = s.transpose() * &ms;
    let h = s.transpose() * &ks;
    let cols = s.ncols();
    let d: Vec<f64> = (0..cols)
        .map(|i| {
            let v = g[(i, i)];
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let dm = DMatrix::from_diagonal(&DVector::from_vec(d));
    let gs = &dm * &g * &dm;
    let gs = (&gs + gs.transpose()) * 0.5;
    let eg = gs.symmetric_eigen();
    let top = eg.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| eg.eigenvalues[i] > 1e-10 * top)
        .collect();
    if keep.len() < m {
        return Err(Error::NotPositiveDefinite(format!(
            "search space collapsed to {} directions (need {m})",
            keep.len()
        )));
    }
    let mut b = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let scale = 1.0 / eg.eigenvalues[i].sqrt();
        for r in 0..cols {
            b[(r, c)] = eg.eigenvectors[(r, i)] * scale;
        }
    }
    let b = &dm * b;
    let hr = b.transpose() * &h * &b;
    let hr = (&hr + hr.transpose()) * 0.5;
    let eh = hr.symmetric_eigen();
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|&p, &q| eh.eigenvalues[p].total_cmp(&eh.eigenvalues[q]));
    let mut y = DMatrix::zeros(keep.len(), m);
    let mut theta = Vec::with_capacity(m);
    for (c, &i) in order.iter().take(m).enumerate() {
        theta.push(eh.eigenvalues[i]);
        y.set_column(c, &eh.eigenvectors.column(i));
    }
    let coef = b * y;
    Ok(Ritz {
        x: s * &coef,
        kx: ks * &coef,
        mx: ms * &coef,
        theta,
    })
}

/// Lowest `count` eigenpairs by block LOBPCG with the preconditioner
/// `diag(K + theta M)^{-1}`, `theta` the largest wanted Ritz value. The
/// start block is drawn from a ChaCha8 stream seeded with `seed`, so results
/// are reproducible. Convergence is judged on the backward error.
pub fn solve_lowest(ops: &OperatorPair, count: usize, tol: f64, seed: u64) -> Result<EigenResult> {
    let n = ops.size();
    if count == 0 || count > n / 4 {
        return Err(Error::InvalidArgument(format!(
            "count must lie in 1..={} for {n} unknowns, got {count}",
            n / 4
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let m = (count + 3).min(n / 3).max(count);
    let max_iter = (50.0 * count as f64 * (n as f64).sqrt()).ceil() as usize;
    let knorm = ops.stiffness.norm_inf();
    let mnorm = ops.mass.norm_inf();
    let kdiag = ops.stiffness.diagonal();
    let mdiag = ops.mass.diagonal();
    if mdiag.iter().any(|&d| d <= 0.0) {
        return Err(Error::NotPositiveDefinite(
            "mass matrix has a non-positive diagonal".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
    let mut ritz = rayleigh_ritz(ops, &start, m)?;
    let mut p: Option<DMatrix<f64>> = None;
    let mut iterations = 0;
    let mut worst = f64::INFINITY;
    while iterations < max_iter {
        let mut r = ritz.kx.clone();
        for j in 0..m {
            let t = ritz.theta[j];
            for i in 0..n {
                r[(i, j)] -= t * ritz.mx[(i, j)];
            }
        }
        let errs: Vec<f64> = (0..m)
            .map(|j| {
                r.column(j).norm()
                    / ((knorm + ritz.theta[j].abs() * mnorm) * ritz.x.column(j).norm())
            })
            .collect();
        worst = errs[..count].iter().copied().fold(0.0, f64::max);
        if worst < tol {
            break;
        }
        iterations += 1;
        let active: Vec<usize> = (0..m).filter(|&j| errs[j] >= tol).collect();
        let shift = ritz.theta[count - 1].max(0.0);
        let mut w = DMatrix::zeros(n, active.len());
        for (c, &j) in active.iter().enumerate() {
            for i in 0..n {
                w[(i, c)] = r[(i, j)] / (kdiag[i] + shift * mdiag[i]);
            }
        }
        let mut blocks = vec![ritz.x.clone(), w];
        if let Some(pp) = &p {
            let mut pa = DMatrix::zeros(n, active.len());
            for (c, &j) in active.iter().enumerate() {
                pa.set_column(c, &pp.column(j));
            }
            blocks.push(pa);
        }
        let total: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut s = DMatrix::zeros(n, total);
        let mut off = 0;
        for b in &blocks {
            s.view_mut((0, off), (n, b.ncols())).copy_from(b);
            off += b.ncols();
        }
        let next = match rayleigh_ritz(ops, &s, m) {
            Ok(next) => next,
            // drop the history block once it becomes dependent
            Err(_) if p.is_some() => {
                p = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        let overlap = ritz.mx.transpose() * &next.x;
        p = Some(&next.x - &ritz.x * overlap);
        ritz = next;
    }
    if worst >= tol {
        return Err(Error::NoConvergence {
            iterations,
            worst_residual: worst,
        });
    }
    // final Ritz step on the converged block restores M-orthonormality
    let clean = rayleigh_ritz(ops, &ritz.x, m)?;
    let lambdas = clean.theta[..count].to_vec();
    let vectors = (0..count)
        .map(|j| clean.x.column(j).iter().copied().collect())
        .collect();
    Ok(finish(ops, lambdas, vectors, iterations, seed, "lobpcg"))
}
