//! Spectral geometry on piecewise-flat simplicial manifolds.
//!
//! The crate builds collar-structured meshes of model manifolds (tori,
//! spheres, balls), equips them with edge-length metrics that are degenerated
//! by a factor `eps` away from the collar, assembles P1 Laplace-Beltrami
//! operators, and inspects the low eigenfunctions: their nodal sets, nodal
//! domains, collar profiles and PL critical points.
//!
//! Module map:
//! - [`mesh`]: generators, audits and JSON I/O for [`mesh::SimplicialMesh`].
//! - [`metric`]: reference, degenerate and smoothed edge-length metrics.
//! - [`fem`]: stiffness/mass assembly, Rayleigh quotients, harmonic extension.
//! - [`eigen`]: LOBPCG and a dense oracle for `K u = lambda M u`.
//! - [`nodal`]: zero-set extraction, census, nodal domains, profile fits.
//! - [`morse`]: lower-link classification of PL critical points.
//! - [`lab`]: scenarios, sweeps, convergence fits and reports.
//!
//! ```
//! use nodal_forge::eigen::solve_lowest;
//! use nodal_forge::fem::{assemble, BoundaryCondition, MassKind};
//! use nodal_forge::mesh::{build_sphere_mesh, CollarSpec, SigmaModel};
//! use nodal_forge::metric::{degenerate_metric, reference_metric};
//! use nodal_forge::nodal::{extract_zero_set, DEFAULT_ZERO_SHIFT};
//!
//! let collar = CollarSpec::new(SigmaModel::Circle, 0.3, 12);
//! let mesh = build_sphere_mesh(2, 2, Some(&collar))?;
//! let g0 = reference_metric(&mesh, std::slice::from_ref(&collar))?;
//! let g = degenerate_metric(&g0, &mesh, 0.05)?;
//! let ops = assemble(&mesh, &g, BoundaryCondition::Closed, MassKind::Consistent)?;
//! let eig = solve_lowest(&ops, 4, 1e-8, 1)?;
//! let u1 = ops.to_full(&eig.vectors[1]);
//! let nodal = extract_zero_set(&mesh, &g, &u1, DEFAULT_ZERO_SHIFT)?;
//! assert_eq!(nodal.components.len(), 1);
//! # Ok::<(), nodal_forge::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod eigen;
pub mod error;
pub mod fem;
pub mod lab;
pub mod mesh;
pub mod metric;
pub mod morse;
pub mod nodal;
pub mod sparse;
mod union_find;

pub use error::{Error, Result};
