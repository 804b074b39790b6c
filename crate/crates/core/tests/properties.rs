use std::sync::OnceLock;

use nalgebra::DMatrix;
use proptest::prelude::*;

use nodal_forge::eigen::{dense_solve, solve_lowest};
use nodal_forge::fem::{assemble, rayleigh, BoundaryCondition, MassKind};
use nodal_forge::mesh::{
    build_sphere_mesh, build_torus_mesh, mesh_audit, CollarSpec, SigmaModel, SimplicialMesh,
};
use nodal_forge::metric::{
    cayley_menger_volume, degenerate_metric, reference_metric, simplex, EdgeLengthMetric,
};
use nodal_forge::morse::classify_critical_vertices;
use nodal_forge::nodal::{extract_zero_set, DEFAULT_ZERO_SHIFT};

struct Capsule {
    mesh: SimplicialMesh,
    g0: EdgeLengthMetric,
}

fn capsule() -> &'static Capsule {
    static C: OnceLock<Capsule> = OnceLock::new();
    C.get_or_init(|| {
        let c = CollarSpec::new(SigmaModel::Circle, 0.3, 8);
        let mesh = build_sphere_mesh(2, 2, Some(&c)).unwrap();
        let g0 = reference_metric(&mesh, &[c]).unwrap();
        Capsule { mesh, g0 }
    })
}

fn icosphere() -> &'static SimplicialMesh {
    static M: OnceLock<SimplicialMesh> = OnceLock::new();
    M.get_or_init(|| build_sphere_mesh(2, 3, None).unwrap())
}

fn scaled(g: &EdgeLengthMetric, c: f64) -> EdgeLengthMetric {
    let mut out = g.clone();
    for l in out.lengths.iter_mut() {
        *l *= c;
    }
    out
}

fn pairwise_lengths(p: &[Vec<f64>]) -> Vec<f64> {
    let d = p.len() - 1;
    let pairs: &[(usize, usize)] = if d == 2 {
        &[(0, 1), (0, 2), (1, 2)]
    } else {
        &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    };
    pairs
        .iter()
        .map(|&(a, b)| {
            p[a].iter()
                .zip(&p[b])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn coordinate_volume(p: &[Vec<f64>]) -> f64 {
    let d = p.len() - 1;
    let e = DMatrix::from_fn(d, d, |i, j| p[j + 1][i] - p[0][i]);
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    e.determinant().abs() / fact
}

fn simplex_points(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), d + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cayley_menger_matches_coordinates(p2 in simplex_points(2), p3 in simplex_points(3)) {
        for p in [p2, p3] {
            let d = p.len() - 1;
            let vol = coordinate_volume(&p);
            prop_assume!(vol > 1e-3);
            let l = pairwise_lengths(&p);
            let cm = cayley_menger_volume(d, &l);
            let gram = simplex::sq_volume(d, &l);
            let tol = 1e-9 * (1.0 + vol * vol);
            prop_assert!((cm - vol * vol).abs() <= tol, "cm {cm} vs {}", vol * vol);
            prop_assert!((gram - vol * vol).abs() <= tol, "gram {gram} vs {}", vol * vol);
        }
    }

    #[test]
    fn degeneration_commutes_with_scaling(c in 0.1f64..10.0, eps in 0.001f64..0.999) {
        let cap = capsule();
        let a = scaled(&degenerate_metric(&cap.g0, &cap.mesh, eps).unwrap(), c);
        let b = degenerate_metric(&scaled(&cap.g0, c), &cap.mesh, eps).unwrap();
        for cell in 0..cap.mesh.num_cells() {
            for (x, y) in a.cell_lengths(&cap.mesh, cell).iter().zip(&b.cell_lengths(&cap.mesh, cell)) {
                prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn exterior_lengths_shrink_with_eps(e1 in 0.001f64..0.99, frac in 0.01f64..0.99) {
        let cap = capsule();
        let e2 = e1 + frac * (1.0 - e1);
        prop_assume!(e2 > e1);
        let g1 = degenerate_metric(&cap.g0, &cap.mesh, e1).unwrap();
        let g2 = degenerate_metric(&cap.g0, &cap.mesh, e2).unwrap();
        for cell in 0..cap.mesh.num_cells() {
            let (l1, l2) = (g1.cell_lengths(&cap.mesh, cell), g2.cell_lengths(&cap.mesh, cell));
            let exterior = cap.mesh.region[cell].collar_index().is_none();
            for (x, y) in l1.iter().zip(&l2) {
                if exterior {
                    prop_assert!(x < y);
                } else {
                    prop_assert!(x == y);
                }
            }
        }
        for cell in 0..cap.mesh.num_cells() {
            prop_assert!(cayley_menger_volume(2, &g1.cell_lengths(&cap.mesh, cell)) > 0.0);
        }
    }

    #[test]
    fn exterior_rayleigh_scales_by_inverse_eps(eps in 0.01f64..0.9, seed in 0u64..1000) {
        let cap = capsule();
        let mut rng = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let nbrs = cap.mesh.vertex_neighbors();
        let u: Vec<f64> = (0..cap.mesh.num_vertices())
            .map(|v| {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let r = (rng >> 11) as f64 / (1u64 << 53) as f64;
                // supported on vertices whose whole star is exterior
                let interior = nbrs[v].iter().all(|&w| cap.mesh.collar_x[w].is_none());
                if cap.mesh.collar_x[v].is_none() && interior { r - 0.5 } else { 0.0 }
            })
            .collect();
        let g = degenerate_metric(&cap.g0, &cap.mesh, eps).unwrap();
        let r0 = rayleigh(&assemble(&cap.mesh, &cap.g0, BoundaryCondition::Closed, MassKind::Consistent).unwrap(), &u).unwrap();
        let r1 = rayleigh(&assemble(&cap.mesh, &g, BoundaryCondition::Closed, MassKind::Consistent).unwrap(), &u).unwrap();
        prop_assert!((r1 * eps / r0 - 1.0).abs() < 1e-10, "{r1} vs {r0} / {eps}");
    }

    #[test]
    fn closed_meshes_keep_euler_characteristic(n in 2usize..=3, refinement in 0usize..=2, layers in 4usize..10) {
        let refinement = if n == 3 { refinement.min(1) } else { refinement };
        let c = if n == 2 {
            CollarSpec::new(SigmaModel::Circle, 0.3, layers)
        } else {
            CollarSpec::new(SigmaModel::Sphere2, 0.4, layers)
        };
        let plain = build_sphere_mesh(n, refinement, None).unwrap();
        let finer = build_sphere_mesh(n, refinement + 1, None).unwrap();
        let with_collar = build_sphere_mesh(n, refinement, Some(&c)).unwrap();
        let chi = if n == 2 { 2 } else { 0 };
        for m in [&plain, &finer, &with_collar] {
            prop_assert!(m.is_closed());
            prop_assert_eq!(m.euler_characteristic(), chi);
            prop_assert!(mesh_audit(m).pass);
        }
    }

    #[test]
    fn morse_counts_ignore_tiny_noise(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, scale in 1e-13f64..1e-12) {
        prop_assume!(a * a + b * b + c * c > 0.1);
        let m = icosphere();
        let u: Vec<f64> = m.coords.iter().map(|p| a * p[0] + b * p[1] + c * p[2] + 0.3 * p[0] * p[1]).collect();
        let noisy: Vec<f64> = u.iter().enumerate().map(|(i, x)| x + scale * i as f64 / u.len() as f64).collect();
        let r0 = classify_critical_vertices(m, &u).unwrap();
        let r1 = classify_critical_vertices(m, &noisy).unwrap();
        prop_assert_eq!(&r0.counts_by_index, &r1.counts_by_index);
        if r0.num_degenerate() == 0 {
            prop_assert_eq!(r0.alternating_sum(), 2);
        }
    }

    #[test]
    fn zero_set_survives_small_perturbation(a in -1.0f64..1.0, b in -1.0f64..1.0, level in -0.5f64..0.5, seed in 0u64..1000) {
        prop_assume!(a * a + b * b > 0.1);
        let m = icosphere();
        let u: Vec<f64> = m.coords.iter().map(|p| a * p[0] + b * p[1] + 0.8 * p[2] * p[2] - level).collect();
        let min_abs = u.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
        prop_assume!(min_abs > 1e-6);
        let mut rng = seed.wrapping_add(17);
        let eta: Vec<f64> = u
            .iter()
            .map(|_| {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.99 * min_abs
            })
            .collect();
        let g = reference_metric(m, &[]).unwrap();
        let v: Vec<f64> = u.iter().zip(&eta).map(|(x, e)| x + e).collect();
        let c0 = extract_zero_set(m, &g, &u, DEFAULT_ZERO_SHIFT).unwrap().components.len();
        let c1 = extract_zero_set(m, &g, &v, DEFAULT_ZERO_SHIFT).unwrap().components.len();
        prop_assert_eq!(c0, c1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn eigenvalues_do_not_depend_on_seed(s1 in 0u64..10_000, s2 in 0u64..10_000, eps in 0.05f64..0.5) {
        let cap = capsule();
        let g = degenerate_metric(&cap.g0, &cap.mesh, eps).unwrap();
        let ops = assemble(&cap.mesh, &g, BoundaryCondition::Closed, MassKind::Consistent).unwrap();
        let tol = 1e-8;
        let a = solve_lowest(&ops, 5, tol, s1).unwrap();
        let b = solve_lowest(&ops, 5, tol, s2).unwrap();
        for (x, y) in a.lambdas.iter().zip(&b.lambdas) {
            prop_assert!((x - y).abs() <= 10.0 * tol * x.abs().max(1.0));
        }
    }

    #[test]
    fn torus_metric_matches_dense_solver(eps in 0.05f64..0.9) {
        let c = CollarSpec::new(SigmaModel::Torus2, 0.3, 4);
        let mesh = build_torus_mesh(3, 6, Some(&c)).unwrap();
        let g = degenerate_metric(&reference_metric(&mesh, &[c]).unwrap(), &mesh, eps).unwrap();
        let ops = assemble(&mesh, &g, BoundaryCondition::Closed, MassKind::Consistent).unwrap();
        prop_assert!(ops.stiffness.asymmetry() <= 1e-13 * ops.stiffness.norm_inf());
        prop_assert!(ops.mass.asymmetry() <= 1e-13 * ops.mass.norm_inf());
        let d = dense_solve(&ops, 4).unwrap();
        prop_assert!(d.lambdas[0].abs() < 1e-9 && d.lambdas[1] > 1e-6);
        let it = solve_lowest(&ops, 4, 1e-10, 2).unwrap();
        for (x, y) in d.lambdas.iter().zip(&it.lambdas) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0));
        }
    }
}
