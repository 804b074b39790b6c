//! Lowest eigenpairs of `K u = lambda M u`.
//!
//! [`solve_lowest`] is a block LOBPCG iteration with a shifted Jacobi
//! preconditioner; [`dense_solve`] is the small-scale oracle.

mod lobpcg;

pub use lobpcg::solve_lowest;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::OperatorPair;
use crate::sparse::{dot, norm2};

/// Largest system accepted by [`dense_solve`].
pub const DENSE_CAP: usize = 4000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambdas: Vec<f64>,
    /// M-normalized eigenvectors on the degrees of freedom.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<Vec<f64>>,
    /// `||K u - lambda M u|| / ||u||`.
    pub residuals: Vec<f64>,
    /// `||K u - lambda M u|| / ((||K|| + |lambda| ||M||) ||u||)`, the
    /// quantity compared against the tolerance.
    pub backward_errors: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    /// `min_k (lambda_{k+1} - lambda_k) / lambda_{k+1}` over the returned
    /// pairs.
    pub gap_report: f64,
    pub solver: String,
}

impl EigenResult {
    /// Copy without the eigenvectors, for compact reports.
    pub fn without_vectors(&self) -> Self {
        Self {
            vectors: Vec::new(),
            ..self.clone()
        }
    }

    pub fn to_json(&self, include_vectors: bool) -> Result<String> {
        if include_vectors {
            Ok(serde_json::to_string(self)?)
        } else {
            Ok(serde_json::to_string(&self.without_vectors())?)
        }
    }
}

pub(crate) fn relative_gaps(lambdas: &[f64]) -> Vec<f64> {
    lambdas
        .windows(2)
        .map(|w| {
            if w[1] > 0.0 {
                (w[1] - w[0]) / w[1]
            } else {
                0.0
            }
        })
        .collect()
}

/// Makes the entry of largest magnitude positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-14 * v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub(crate) fn finish(
    ops: &OperatorPair,
    lambdas: Vec<f64>,
    mut vectors: Vec<Vec<f64>>,
    iterations: usize,
    seed: u64,
    solver: &str,
) -> EigenResult {
    let knorm = ops.stiffness.norm_inf();
    let mnorm = ops.mass.norm_inf();
    let mut residuals = Vec::with_capacity(lambdas.len());
    let mut backward = Vec::with_capacity(lambdas.len());
    for (lambda, v) in lambdas.iter().zip(vectors.iter_mut()) {
        fix_sign(v);
        let kv = ops.stiffness.mul_vec(v);
        let mv = ops.mass.mul_vec(v);
        let r: Vec<f64> = kv.iter().zip(&mv).map(|(a, b)| a - lambda * b).collect();
        let raw = norm2(&r) / norm2(v);
        residuals.push(raw);
        backward.push(raw / (knorm + lambda.abs() * mnorm));
    }
    let gap_report = relative_gaps(&lambdas)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    EigenResult {
        lambdas,
        vectors,
        residuals,
        backward_errors: backward,
        iterations,
        seed,
        gap_report,
        solver: solver.to_string(),
    }
}

/// Dense generalized solve through `M = L L^T` and the symmetric
/// eigenproblem of `L^{-1} K L^{-T}`.
pub fn dense_solve(ops: &OperatorPair, count: usize) -> Result<EigenResult> {
    let n = ops.size();
    if n > DENSE_CAP {
        return Err(Error::SizeCap {
            size: n,
            cap: DENSE_CAP,
        });
    }
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!(
            "cannot return {count} of {n} eigenpairs"
        )));
    }
    let k = ops.stiffness.to_dense();
    let m = ops.mass.to_dense();
    let chol = nalgebra::Cholesky::new(m)
        .ok_or_else(|| Error::NotPositiveDefinite("mass matrix".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite("mass factor".into()))?;
    let c = &l_inv * k * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt_inv = l_inv.transpose();
    let mut lambdas = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        lambdas.push(eig.eigenvalues[i]);
        let u = &lt_inv * eig.eigenvectors.column(i);
        vectors.push(u.iter().copied().collect());
    }
    Ok(finish(ops, lambdas, vectors, 1, 0, "dense"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub pass: bool,
    /// First `k` whose gap to `k + 1` is too small.
    pub failing_k: Option<usize>,
    pub gaps: Vec<f64>,
}

/// Passes iff `(lambda_{k+1} - lambda_k) / lambda_{k+1} >= min_gap` for all
/// `k < l`.
pub fn simplicity_guard(lambdas: &[f64], l: usize, min_gap: f64) -> Result<GapCheck> {
    if lambdas.len() < l + 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} eigenvalues, have {}",
            l + 1,
            lambdas.len()
        )));
    }
    let gaps: Vec<f64> = relative_gaps(&lambdas[..=l]);
    let failing_k = gaps.iter().position(|&g| g < min_gap);
    Ok(GapCheck {
        pass: failing_k.is_none(),
        failing_k,
        gaps,
    })
}

/// Largest `|u_i^T M u_j - delta_ij|`.
pub fn orthonormality_defect(ops: &OperatorPair, vectors: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        let ma = ops.mass.mul_vec(a);
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&ma, b) - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_examples() {
        assert!(
            simplicity_guard(&[0.0, 2.4, 9.5, 40.0], 2, 0.1)
                .unwrap()
                .pass
        );
        let g = simplicity_guard(&[0.0, 2.4, 2.41, 9.0], 2, 0.1).unwrap();
        assert!(!g.pass);
        assert_eq!(g.failing_k, Some(1));
        let g = simplicity_guard(&[0.0, 2.0, 2.0, 2.0], 2, 0.1).unwrap();
        assert_eq!(g.failing_k, Some(1));
        assert!(simplicity_guard(&[0.0], 1, 0.1).is_err());
    }

    fn sphere_ops(refinement: usize) -> OperatorPair {
        let mesh = crate::mesh::build_sphere_mesh(2, refinement, None).unwrap();
        let g = crate::metric::reference_metric(&mesh, &[]).unwrap();
        crate::fem::assemble(
            &mesh,
            &g,
            crate::fem::BoundaryCondition::Closed,
            crate::fem::MassKind::Consistent,
        )
        .unwrap()
    }

    #[test]
    fn lobpcg_matches_dense() {
        let ops = sphere_ops(2);
        let dense = dense_solve(&ops, 6).unwrap();
        let it = solve_lowest(&ops, 6, 1e-10, 7).unwrap();
        for (a, b) in dense.lambdas.iter().zip(&it.lambdas) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
        }
        assert!(dense.lambdas[0].abs() < 1e-10);
        assert!(orthonormality_defect(&ops, &it.vectors) < 1e-10);
        assert!(orthonormality_defect(&ops, &dense.vectors) < 1e-10);
        let c0 = it.vectors[0][0];
        assert!(it.vectors[0]
            .iter()
            .all(|x| (x - c0).abs() < 1e-8 * c0.abs()));
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.5];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.5]);
    }
}
