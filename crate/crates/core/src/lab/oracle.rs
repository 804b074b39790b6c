use std::f64::consts::PI;

use super::verdict::Verdict;
use crate::eigen::{dense_solve, solve_lowest};
use crate::error::{Error, Result};
use crate::fem::{assemble, BoundaryCondition, MassKind};
use crate::mesh::{
    build_ball_mesh, build_multi_collar_mesh, build_sphere_mesh, build_torus_mesh, kuhn_torus,
    CollarSpec, SigmaModel, SimplicialMesh,
};
use crate::metric::{cayley_menger_volume, degenerate_metric, reference_metric, EdgeLengthMetric};

pub const ORACLE_NAMES: [&str; 4] = [
    "dense-agreement",
    "sphere-convergence",
    "flat-torus",
    "cayley-menger",
];

/// Largest mesh handed to the dense comparison.
pub const DENSE_ORACLE_VERTICES: usize = 2000;

struct Case {
    label: String,
    mesh: SimplicialMesh,
    metric: EdgeLengthMetric,
    bc: BoundaryCondition,
}

fn case(
    label: &str,
    mesh: SimplicialMesh,
    collars: &[CollarSpec],
    eps: Option<f64>,
    bc: BoundaryCondition,
) -> Result<Case> {
    let g0 = reference_metric(&mesh, collars)?;
    let metric = match eps {
        Some(e) => degenerate_metric(&g0, &mesh, e)?,
        None => g0,
    };
    Ok(Case {
        label: label.to_string(),
        mesh,
        metric,
        bc,
    })
}

fn dense_cases() -> Result<Vec<Case>> {
    let s2 = CollarSpec::new(SigmaModel::Sphere2, 0.4, 6);
    let circle = CollarSpec::new(SigmaModel::Circle, 0.3, 8);
    let torus2 = CollarSpec::new(SigmaModel::Torus2, 0.3, 4);
    let closed = BoundaryCondition::Closed;
    Ok(vec![
        case(
            "icosphere level 3",
            build_sphere_mesh(2, 3, None)?,
            &[],
            None,
            closed,
        )?,
        case(
            "S^3 level 1",
            build_sphere_mesh(3, 1, None)?,
            &[],
            None,
            closed,
        )?,
        case("flat T^2 24x24", kuhn_torus(2, 24, 1.0)?, &[], None, closed)?,
        case(
            "flat T^3 8^3",
            build_torus_mesh(3, 8, None)?,
            &[],
            None,
            closed,
        )?,
        case(
            "S^2 capsule, eps 0.05",
            build_sphere_mesh(2, 2, Some(&circle))?,
            std::slice::from_ref(&circle),
            Some(0.05),
            closed,
        )?,
        case(
            "S^3 capsule, eps 0.1",
            build_sphere_mesh(3, 0, Some(&s2))?,
            std::slice::from_ref(&s2),
            Some(0.1),
            closed,
        )?,
        case(
            "T^3 with torus collar, eps 0.1",
            build_torus_mesh(3, 8, Some(&torus2))?,
            std::slice::from_ref(&torus2),
            Some(0.1),
            closed,
        )?,
        case(
            "two-collar S^2, eps 0.05",
            build_multi_collar_mesh(
                2,
                1,
                &[circle.clone(), circle.clone().with_gamma(0.8).with_label(1)],
                0.5,
            )?,
            &[circle.clone(), circle.clone().with_gamma(0.8).with_label(1)],
            Some(0.05),
            closed,
        )?,
        case(
            "Dirichlet disk with collar, eps 0.05",
            build_ball_mesh(2, 2, &circle)?,
            std::slice::from_ref(&circle),
            Some(0.05),
            BoundaryCondition::Dirichlet,
        )?,
    ])
}

/// LOBPCG against the dense solver on meshes of at most
/// [`DENSE_ORACLE_VERTICES`] vertices.
pub fn dense_agreement(count: usize, rel_tol: f64) -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in dense_cases()? {
        if c.mesh.num_vertices() > DENSE_ORACLE_VERTICES {
            return Err(Error::InvalidArgument(format!(
                "{} exceeds the dense oracle size",
                c.label
            )));
        }
        let ops = assemble(&c.mesh, &c.metric, c.bc, MassKind::Consistent)?;
        let dense = dense_solve(&ops, count)?;
        let iter = solve_lowest(&ops, count, 1e-11, 11)?;
        let worst = dense
            .lambdas
            .iter()
            .zip(&iter.lambdas)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        pass &= worst <= rel_tol;
        parts.push(format!(
            "{} ({} vertices): {worst:.1e}",
            c.label,
            c.mesh.num_vertices()
        ));
    }
    Ok(Verdict {
        name: "dense_agreement".into(),
        pass,
        detail: format!(
            "max relative difference, tol {rel_tol:.0e}: {}",
            parts.join("; ")
        ),
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let num: f64 = points
        .iter()
        .map(|p| (p.0.ln() - mx) * (p.1.ln() - my))
        .sum();
    let den: f64 = points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    num / den
}

fn max_edge(mesh: &SimplicialMesh, g: &EdgeLengthMetric) -> f64 {
    g.lengths
        .iter()
        .take(mesh.edges().len())
        .copied()
        .fold(0.0, f64::max)
}

/// Uniform-metric icosphere eigenvalues `lambda_1..3` against `2`.
pub fn sphere_convergence(levels: &[usize], min_order: f64) -> Result<Verdict> {
    let mut points = Vec::new();
    let mut parts = Vec::new();
    for &lev in levels {
        let mesh = build_sphere_mesh(2, lev, None)?;
        let g = reference_metric(&mesh, &[])?;
        let ops = assemble(&mesh, &g, BoundaryCondition::Closed, MassKind::Consistent)?;
        let res = solve_lowest(&ops, 4, 1e-11, 3)?;
        let err = res.lambdas[1..4]
            .iter()
            .map(|l| (l - 2.0).abs())
            .fold(0.0, f64::max);
        let h = max_edge(&mesh, &g);
        points.push((h, err));
        parts.push(format!(
            "level {lev}: h {h:.4}, lambda_1..3 {:?}",
            &res.lambdas[1..4]
        ));
    }
    let order = log_log_slope(&points);
    Ok(Verdict {
        name: "sphere_convergence".into(),
        pass: order >= min_order,
        detail: format!(
            "order {order:.3} (required >= {min_order}); {}",
            parts.join("; ")
        ),
    })
}

/// Flat `T^n` of period 1: `lambda_1 = 4 pi^2` with multiplicity `2n`.
pub fn flat_torus(n: usize, divisions: &[usize], min_order: f64) -> Result<Verdict> {
    let target = 4.0 * PI * PI;
    let mult = 2 * n;
    let mut points = Vec::new();
    let mut parts = Vec::new();
    for &d in divisions {
        let mesh = kuhn_torus(n, d, 1.0)?;
        let g = reference_metric(&mesh, &[])?;
        let ops = assemble(&mesh, &g, BoundaryCondition::Closed, MassKind::Consistent)?;
        let res = solve_lowest(&ops, mult + 1, 1e-11, 5)?;
        let err = res.lambdas[1..=mult]
            .iter()
            .map(|l| (l - target).abs() / target)
            .fold(0.0, f64::max);
        let h = 1.0 / d as f64;
        points.push((h, err));
        parts.push(format!(
            "{d} divisions: rel error {err:.3e} ((2 pi h)^2 = {:.3e})",
            (2.0 * PI * h).powi(2)
        ));
    }
    let order = log_log_slope(&points);
    let within = points.iter().all(|&(h, e)| e <= (2.0 * PI * h).powi(2));
    Ok(Verdict {
        name: format!("flat_torus_t{n}"),
        pass: order >= min_order && within,
        detail: format!(
            "order {order:.3} (required >= {min_order}); {}",
            parts.join("; ")
        ),
    })
}

/// Regular unit triangle and tetrahedron.
pub fn cayley_menger() -> Verdict {
    let tri = cayley_menger_volume(2, &[1.0; 3]).sqrt();
    let tet = cayley_menger_volume(3, &[1.0; 6]).sqrt();
    let (t0, t1) = (3f64.sqrt() / 4.0, 1.0 / (6.0 * 2f64.sqrt()));
    let e0 = (tri - t0).abs() / t0;
    let e1 = (tet - t1).abs() / t1;
    Verdict {
        name: "cayley_menger".into(),
        pass: e0 <= 8.0 * f64::EPSILON && e1 <= 8.0 * f64::EPSILON,
        detail: format!("triangle {tri:.17} (rel {e0:.1e}), tetrahedron {tet:.17} (rel {e1:.1e})"),
    }
}

/// Runs one named oracle, or all of them for `"all"`.
pub fn run_oracle(name: &str) -> Result<Vec<Verdict>> {
    match name {
        "dense-agreement" => Ok(vec![dense_agreement(6, 1e-8)?]),
        "sphere-convergence" => Ok(vec![sphere_convergence(&[2, 3, 4, 5], 1.8)?]),
        "flat-torus" => Ok(vec![
            flat_torus(2, &[8, 16, 32, 64], 1.8)?,
            flat_torus(3, &[6, 12, 24], 1.8)?,
        ]),
        "cayley-menger" => Ok(vec![cayley_menger()]),
        "all" => {
            let mut out = Vec::new();
            for n in ORACLE_NAMES {
                out.extend(run_oracle(n)?);
            }
            Ok(out)
        }
        other => Err(Error::Config(format!(
            "unknown oracle `{other}` (expected one of {ORACLE_NAMES:?} or `all`)"
        ))),
    }
}
