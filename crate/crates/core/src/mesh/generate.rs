//! Mesh generators for the model manifolds.
//!
//! Collar meshes are built as suspensions: a cross-section `Sigma` is swept
//! along a one-dimensional line of layers, each slab between consecutive
//! layers is split into simplices, and the line is closed by cones (poles),
//! left open (boundary) or wrapped (periodic). Along the line the reference
//! metric is the warped product `ds^2 + f(s)^2 g_Sigma`, with `f = r` on
//! collars and cylinders and `f = r sin(theta)` on round caps, realized by
//! the hypersurface of revolution `(f(s) p, z(s))` whose chords give the
//! reference edge lengths. Inside collar `i` the arclength is `s = Gamma_i
//! (x + 1)` plus an offset, so cross-layer chords equal `Gamma_i dx`.

use std::f64::consts::PI;

use super::sigma::{cross_polytope_s3, SigmaMesh};
use super::{CollarSpec, Geometry, Region, SigmaModel, SimplicialMesh};
use crate::error::{Error, Result};
use crate::metric::simplex;

/// Shape-regularity floor (`n * inradius / circumradius`) for generated
/// meshes.
pub const QUALITY_FLOOR: f64 = 0.05;

/// One piece of the suspension line.
#[derive(Debug, Clone, PartialEq)]
pub enum LineSegment {
    /// Quarter-circle cap of radius `r` ending (or starting) at a pole.
    Cap { layers: usize },
    /// Exterior cylinder `[0, length] x Sigma`.
    Cylinder { length: f64, layers: usize },
    /// Collar `(-1, 1) x Sigma` with metric `Gamma^2 dx^2 + r^2 g_Sigma`.
    Collar(CollarSpec),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    s: f64,
    f: f64,
    z: f64,
    pole: bool,
    collar: Option<(usize, f64)>,
}

/// Sweeps `sigma` along `segments`. With `periodic` the last layer is
/// glued back to the first and no caps are allowed. `r` scales round
/// cross-sections; flat cross-sections carry their own scale.
pub fn build_suspension_mesh(
    sigma: &SigmaMesh,
    r: f64,
    segments: &[LineSegment],
    periodic: bool,
) -> Result<SimplicialMesh> {
    if segments.is_empty() {
        return Err(Error::InvalidArgument(
            "suspension needs at least one segment".into(),
        ));
    }
    let n = sigma.dim + 1;
    let mut labels = std::collections::HashSet::new();
    for seg in segments {
        if let LineSegment::Collar(c) = seg {
            c.validate(0)?;
            if !labels.insert(c.label) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate collar label {}",
                    c.label
                )));
            }
        }
    }
    for (k, seg) in segments.iter().enumerate() {
        if let LineSegment::Cap { layers } = seg {
            if periodic || sigma.is_flat() {
                return Err(Error::InvalidArgument(
                    "caps need a round, non-periodic line".into(),
                ));
            }
            if k != 0 && k != segments.len() - 1 {
                return Err(Error::InvalidArgument(
                    "caps may only close the line".into(),
                ));
            }
            if *layers < 2 {
                return Err(Error::InvalidArgument("caps need at least 2 layers".into()));
            }
        }
    }

    // walk the line
    let mut nodes: Vec<Node> = Vec::new();
    let mut slab_region: Vec<Region> = Vec::new();
    let (mut s, mut z) = (0.0, 0.0);
    for (k, seg) in segments.iter().enumerate() {
        let first = nodes.is_empty();
        match seg {
            LineSegment::Cap { layers } => {
                let m = *layers;
                let south = k == 0;
                let arc = 0.5 * PI * r;
                for j in 0..=m {
                    if !first && j == 0 {
                        continue;
                    }
                    let t = j as f64 / m as f64;
                    let theta = if south {
                        0.5 * PI * t
                    } else {
                        0.5 * PI * (1.0 - t)
                    };
                    let (fj, zj, sj) = if south {
                        (r * theta.sin(), -r * theta.cos(), r * theta)
                    } else {
                        (r * theta.sin(), z + r * theta.cos(), s + arc * t)
                    };
                    nodes.push(Node {
                        s: sj,
                        f: fj,
                        z: zj,
                        pole: theta.abs() < 1e-15,
                        collar: None,
                    });
                    if nodes.len() > 1 {
                        slab_region.push(Region::Exterior);
                    }
                }
                if south {
                    s = arc;
                    z = 0.0;
                } else {
                    s += arc;
                    z += r;
                }
            }
            LineSegment::Cylinder { length, layers } => {
                if *layers == 0 || !(*length > 0.0) {
                    return Err(Error::InvalidArgument(
                        "cylinder needs positive length and layers".into(),
                    ));
                }
                for j in 0..=*layers {
                    if !first && j == 0 {
                        continue;
                    }
                    let ds = length * j as f64 / *layers as f64;
                    nodes.push(Node {
                        s: s + ds,
                        f: r,
                        z: z + ds,
                        pole: false,
                        collar: None,
                    });
                    if nodes.len() > 1 {
                        slab_region.push(Region::Exterior);
                    }
                }
                s += length;
                z += length;
            }
            LineSegment::Collar(c) => {
                let length = 2.0 * c.gamma;
                for j in 0..=c.layers {
                    let x = -1.0 + 2.0 * j as f64 / c.layers as f64;
                    let ds = length * j as f64 / c.layers as f64;
                    if !first && j == 0 {
                        // junction node joins this collar at x = -1
                        if let Some(last) = nodes.last_mut() {
                            last.collar = Some((c.label, -1.0));
                        }
                        continue;
                    }
                    nodes.push(Node {
                        s: s + ds,
                        f: r,
                        z: z + ds,
                        pole: false,
                        collar: Some((c.label, x)),
                    });
                    if nodes.len() > 1 {
                        slab_region.push(Region::Collar(c.label));
                    }
                }
                s += length;
                z += length;
            }
        }
    }
    let period = s;
    if periodic {
        // the final node coincides with the first one
        let last = nodes.pop().expect("non-empty line");
        if let (Some(c), None) = (last.collar, nodes[0].collar) {
            nodes[0].collar = Some(c);
        }
        if nodes.len() < 3 {
            return Err(Error::Resolution(
                "periodic line needs at least 3 layers".into(),
            ));
        }
    }

    // distance to the closed collar along the line
    let intervals: Vec<(f64, f64)> = {
        let mut out = Vec::new();
        let mut start = None;
        for (j, node) in nodes.iter().enumerate() {
            match (node.collar.is_some(), start) {
                (true, None) => start = Some(j),
                (false, Some(a)) => {
                    out.push((nodes[a].s, nodes[j - 1].s));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(a) = start {
            out.push((nodes[a].s, nodes[nodes.len() - 1].s));
        }
        out
    };
    let depth_of = |sv: f64| -> f64 {
        let mut best = f64::INFINITY;
        for &(a, b) in &intervals {
            let shifts: &[f64] = if periodic {
                &[-period, 0.0, period]
            } else {
                &[0.0]
            };
            for &sh in shifts {
                let (a, b) = (a + sh, b + sh);
                let d = if sv < a {
                    a - sv
                } else if sv > b {
                    sv - b
                } else {
                    0.0
                };
                best = best.min(d);
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    };

    // vertices
    let ns = sigma.points.len();
    let mut offset = Vec::with_capacity(nodes.len());
    let mut coords = Vec::new();
    let mut collar_x = Vec::new();
    let mut depth = Vec::new();
    for node in &nodes {
        offset.push(coords.len());
        let count = if node.pole { 1 } else { ns };
        for p in sigma.points.iter().take(count) {
            let mut c = Vec::with_capacity(n + 1);
            if sigma.is_flat() {
                c.push(node.s);
                c.extend_from_slice(p);
            } else {
                if node.pole {
                    c.extend(std::iter::repeat_n(0.0, sigma.dim + 1));
                } else {
                    c.extend(p.iter().map(|x| node.f * x));
                }
                c.push(node.z);
            }
            coords.push(c);
            collar_x.push(node.collar.map(|(_, x)| x));
            depth.push(if node.collar.is_some() {
                0.0
            } else {
                depth_of(node.s)
            });
        }
    }

    // cells
    let mut cells = Vec::new();
    let mut region = Vec::new();
    let nslabs = if periodic {
        nodes.len()
    } else {
        nodes.len() - 1
    };
    for j in 0..nslabs {
        let (a, b) = (j, (j + 1) % nodes.len());
        let reg = slab_region
            .get(j)
            .copied()
            .unwrap_or(slab_region[slab_region.len() - 1]);
        if nodes[a].pole || nodes[b].pole {
            let (pole, ring) = if nodes[a].pole { (a, b) } else { (b, a) };
            for sc in &sigma.cells {
                let mut cell = vec![offset[pole]];
                cell.extend(sc.iter().map(|&v| offset[ring] + v));
                cells.push(cell);
                region.push(reg);
            }
            continue;
        }
        for sc in &sigma.cells {
            let mut sv = sc.clone();
            sv.sort_unstable();
            let lo = |v: usize| offset[a] + v;
            let hi = |v: usize| offset[b] + v;
            let new: Vec<Vec<usize>> = match sv.len() {
                2 => {
                    let (p, q) = (sv[0], sv[1]);
                    vec![vec![lo(p), lo(q), hi(q)], vec![lo(p), hi(q), hi(p)]]
                }
                3 => {
                    let (p, q, t) = (sv[0], sv[1], sv[2]);
                    vec![
                        vec![lo(p), lo(q), lo(t), hi(t)],
                        vec![lo(p), lo(q), hi(q), hi(t)],
                        vec![lo(p), hi(p), hi(q), hi(t)],
                    ]
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "Sigma must be 1- or 2-dimensional".into(),
                    ))
                }
            };
            for c in new {
                cells.push(c);
                region.push(reg);
            }
        }
    }

    let geometry = if sigma.is_flat() {
        let mut periods = vec![if periodic { period } else { 0.0 }];
        periods.extend_from_slice(&sigma.periods);
        Geometry::FlatPeriodic { periods }
    } else {
        Geometry::Embedded
    };
    let mut mesh = SimplicialMesh::new(n, coords, cells, geometry)?;
    mesh.set_collar_data(region, collar_x, depth)?;
    check_quality(&mesh)?;
    Ok(mesh)
}

fn check_quality(mesh: &SimplicialMesh) -> Result<()> {
    for c in 0..mesh.num_cells() {
        let q = simplex::quality(mesh.dim, &mesh.cell_coordinate_lengths(c));
        if !(q >= QUALITY_FLOOR) {
            return Err(Error::PoorQuality {
                cell: c,
                quality: q,
                floor: QUALITY_FLOOR,
            });
        }
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dimension must be 2 or 3, got {n}"
        )))
    }
}

fn expect_sigma(collar: &CollarSpec, allowed: &[SigmaModel]) -> Result<()> {
    if allowed.contains(&collar.sigma_model) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Sigma model {:?} not available here (expected one of {allowed:?})",
            collar.sigma_model
        )))
    }
}

/// Round cross-section for a suspension of dimension `n`: an icosphere for
/// `n = 3`, a `8 * 2^refinement`-gon for `n = 2`.
fn round_sigma(n: usize, refinement: usize) -> SigmaMesh {
    if n == 3 {
        SigmaMesh::icosphere(refinement)
    } else {
        SigmaMesh::circle(8 << refinement)
    }
}

fn cap_layers(r: f64, spacing: f64) -> usize {
    ((0.5 * PI * r / spacing).ceil() as usize).max(2)
}

/// Periodic Kuhn triangulation of `[0, period)^n` (2 triangles per square,
/// 6 tetrahedra per cube), with the given collar swept along the first
/// axis when requested.
pub fn build_torus_mesh(
    n: usize,
    divisions: usize,
    collar: Option<&CollarSpec>,
) -> Result<SimplicialMesh> {
    check_dim(n)?;
    if divisions < 4 {
        return Err(Error::Resolution(format!(
            "torus needs at least 4 divisions, got {divisions}"
        )));
    }
    match collar {
        None => kuhn_torus(n, divisions, 1.0),
        Some(c) => {
            expect_sigma(
                c,
                if n == 2 {
                    &[SigmaModel::Circle]
                } else {
                    &[SigmaModel::Torus2]
                },
            )?;
            if divisions < c.layers + 2 {
                return Err(Error::Resolution(format!(
                    "{divisions} divisions cannot hold {} collar layers plus an exterior",
                    c.layers
                )));
            }
            let sigma = if n == 2 {
                SigmaMesh::flat_circle(divisions, c.r)
            } else {
                SigmaMesh::flat_torus(divisions, c.r)
            };
            let ext_layers = divisions - c.layers;
            let segments = [
                LineSegment::Collar(c.clone()),
                LineSegment::Cylinder {
                    length: c.layer_spacing() * ext_layers as f64,
                    layers: ext_layers,
                },
            ];
            build_suspension_mesh(&sigma, c.r, &segments, true)
        }
    }
}

/// Flat torus with an arbitrary period.
pub fn kuhn_torus(n: usize, divisions: usize, period: f64) -> Result<SimplicialMesh> {
    kuhn_box(&vec![divisions; n], &vec![period; n])
}

/// Periodic Kuhn grid with `divisions[k]` cells of size `periods[k] /
/// divisions[k]` along axis `k`.
pub(crate) fn kuhn_box(divisions: &[usize], periods: &[f64]) -> Result<SimplicialMesh> {
    let n = divisions.len();
    check_dim(n)?;
    if divisions.iter().any(|&d| d < 3) {
        return Err(Error::Resolution(
            "periodic grid needs at least 3 divisions per axis".into(),
        ));
    }
    let strides: Vec<usize> = (0..n).map(|k| divisions[..k].iter().product()).collect();
    let total: usize = divisions.iter().product();
    let index_of = |ix: &[usize]| -> usize {
        ix.iter()
            .enumerate()
            .map(|(k, &i)| (i % divisions[k]) * strides[k])
            .sum()
    };
    let mut coords = Vec::with_capacity(total);
    for v in 0..total {
        coords.push(
            (0..n)
                .map(|k| {
                    ((v / strides[k]) % divisions[k]) as f64 * periods[k] / divisions[k] as f64
                })
                .collect(),
        );
    }
    let perms: Vec<Vec<usize>> = if n == 2 {
        vec![vec![0, 1], vec![1, 0]]
    } else {
        vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ]
    };
    let mut cells = Vec::with_capacity(total * perms.len());
    for v in 0..total {
        let base: Vec<usize> = (0..n).map(|k| (v / strides[k]) % divisions[k]).collect();
        for perm in &perms {
            let mut ix = base.clone();
            let mut cell = vec![index_of(&ix)];
            for &axis in perm {
                ix[axis] += 1;
                cell.push(index_of(&ix));
            }
            cells.push(cell);
        }
    }
    let mesh = SimplicialMesh::new(
        n,
        coords,
        cells,
        Geometry::FlatPeriodic {
            periods: periods.to_vec(),
        },
    )?;
    Ok(mesh)
}

/// Round `S^n`: icosphere (`n = 2`) or subdivided 16-cell (`n = 3`) without
/// a collar; with a collar, a capsule `cap - collar - cap` around the
/// equatorial `S^(n-1)`.
pub fn build_sphere_mesh(
    n: usize,
    refinement: usize,
    collar: Option<&CollarSpec>,
) -> Result<SimplicialMesh> {
    check_dim(n)?;
    match collar {
        None => {
            if n == 2 {
                let s = SigmaMesh::icosphere(refinement);
                SimplicialMesh::new(2, s.points, s.cells, Geometry::Embedded)
            } else {
                let (p, c) = cross_polytope_s3(refinement);
                SimplicialMesh::new(3, p, c, Geometry::Embedded)
            }
        }
        Some(c) => build_multi_collar_mesh(n, refinement, std::slice::from_ref(c), 0.0),
    }
}

/// Capsule `S^n` with several collars separated by exterior cylinders of
/// length `gap`. All collars share the cross-section radius of the first.
pub fn build_multi_collar_mesh(
    n: usize,
    refinement: usize,
    collars: &[CollarSpec],
    gap: f64,
) -> Result<SimplicialMesh> {
    check_dim(n)?;
    let first = collars
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one collar required".into()))?;
    let model = if n == 3 {
        SigmaModel::Sphere2
    } else {
        SigmaModel::Circle
    };
    for c in collars {
        expect_sigma(c, &[model])?;
        if (c.r - first.r).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "collars in one capsule must share r".into(),
            ));
        }
    }
    if collars.len() > 1 && !(gap > 0.0) {
        return Err(Error::InvalidArgument(
            "collars must be separated by a positive gap".into(),
        ));
    }
    let h = first.layer_spacing();
    let cap = cap_layers(first.r, h);
    let mut segments = vec![LineSegment::Cap { layers: cap }];
    for (i, c) in collars.iter().enumerate() {
        if i > 0 {
            segments.push(LineSegment::Cylinder {
                length: gap,
                layers: ((gap / h).round() as usize).max(2),
            });
        }
        segments.push(LineSegment::Collar(c.clone()));
    }
    segments.push(LineSegment::Cap { layers: cap });
    build_suspension_mesh(&round_sigma(n, refinement), first.r, &segments, false)
}

/// Length of the exterior shell between the collar and the boundary of the
/// ball, in reference-metric units.
pub const BALL_OUTER_LENGTH: f64 = 1.0;

/// Ball `B^n` as `cap - collar - shell`, the shell ending at the boundary
/// sphere. The collar resolution is limited to `8 * 2^refinement` layers.
pub fn build_ball_mesh(n: usize, refinement: usize, collar: &CollarSpec) -> Result<SimplicialMesh> {
    check_dim(n)?;
    if refinement < 1 {
        return Err(Error::InvalidArgument(
            "ball mesh needs refinement >= 1".into(),
        ));
    }
    expect_sigma(
        collar,
        &[if n == 3 {
            SigmaModel::Sphere2
        } else {
            SigmaModel::Circle
        }],
    )?;
    let max_layers = 8usize << refinement;
    if collar.layers > max_layers {
        return Err(Error::Resolution(format!(
            "{} collar layers exceed the radial resolution {max_layers} at refinement {refinement}",
            collar.layers
        )));
    }
    let h = collar.layer_spacing();
    let segments = [
        LineSegment::Cap {
            layers: cap_layers(collar.r, h),
        },
        LineSegment::Collar(collar.clone()),
        LineSegment::Cylinder {
            length: BALL_OUTER_LENGTH,
            layers: ((BALL_OUTER_LENGTH / h).round() as usize).max(2),
        },
    ];
    build_suspension_mesh(&round_sigma(n, refinement), collar.r, &segments, false)
}

/// A genus-`g` handlebody boundary inside a flat 3-torus: the surface at
/// distance `tube_radius` from a union of horizontal circles.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HandlebodySpec {
    pub periods: [f64; 3],
    pub spacing: f64,
    /// (center x, center y, center z, radius) per core circle, in the xy-plane.
    pub circles: Vec<[f64; 4]>,
    pub tube_radius: f64,
    pub half_width: f64,
    pub tangential_scale: f64,
}

impl HandlebodySpec {
    /// Genus-2 handlebody: two solid tori whose tubes overlap while their
    /// cores (`phi < -half_width`) stay disjoint, placed off the grid's
    /// symmetry planes.
    pub fn genus_two() -> Self {
        Self {
            periods: [4.2, 2.8, 1.8],
            spacing: 0.1,
            circles: vec![[1.31, 1.41, 0.93, 0.62], [2.89, 1.43, 0.93, 0.62]],
            tube_radius: 0.3,
            half_width: 0.2,
            tangential_scale: 0.3,
        }
    }

    /// Signed distance to the handlebody boundary (negative inside).
    pub fn phi(&self, p: &[f64]) -> f64 {
        self.circles
            .iter()
            .map(|c| {
                let rho = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
                ((rho - c[3]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
            - self.tube_radius
    }
}

/// Flat 3-torus containing a level-set collar `|phi| <= w` around a
/// handlebody boundary; `collar_x = phi / w`.
pub fn build_handlebody_mesh(spec: &HandlebodySpec) -> Result<SimplicialMesh> {
    if !(spec.half_width > 0.0 && spec.half_width < spec.tube_radius) {
        return Err(Error::InvalidArgument(
            "collar half-width must lie in (0, tube radius)".into(),
        ));
    }
    if !(spec.tangential_scale > 0.0 && spec.tangential_scale < 1.0 / spec.half_width) {
        return Err(Error::InvalidArgument(
            "tangential scale must lie in (0, 1/w)".into(),
        ));
    }
    let divisions: Vec<usize> = spec
        .periods
        .iter()
        .map(|p| (p / spec.spacing).round() as usize)
        .collect();
    if spec.half_width < 1.5 * spec.spacing {
        return Err(Error::Resolution(
            "collar must span at least three grid cells".into(),
        ));
    }
    let mut mesh = kuhn_box(&divisions, &spec.periods)?;
    // shape regularity of the chart grid; the collar metric is anisotropic
    // by construction
    check_quality(&mesh)?;
    let phi: Vec<f64> = mesh.coords.iter().map(|p| spec.phi(p)).collect();
    let w = spec.half_width;
    let mut region = Vec::with_capacity(mesh.num_cells());
    let mut collar_x = vec![None; mesh.num_vertices()];
    for cell in &mesh.cells {
        if cell.iter().all(|&v| phi[v].abs() <= w) {
            region.push(Region::Collar(0));
            for &v in cell {
                collar_x[v] = Some(phi[v] / w);
            }
        } else {
            region.push(Region::Exterior);
        }
    }
    let depth = phi
        .iter()
        .zip(&collar_x)
        .map(|(p, x)| {
            if x.is_some() {
                0.0
            } else {
                ((p.abs() - w) / w).max(0.0)
            }
        })
        .collect();
    mesh.geometry = Geometry::ImplicitCollar {
        periods: spec.periods.to_vec(),
        phi,
        half_width: w,
        tangential_scale: spec.tangential_scale,
    };
    mesh.set_collar_data(region, collar_x, depth)?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts() {
        let t2 = build_torus_mesh(2, 4, None).unwrap();
        assert_eq!(
            (t2.num_vertices(), t2.num_cells(), t2.euler_characteristic()),
            (16, 32, 0)
        );
        let t3 = build_torus_mesh(3, 4, None).unwrap();
        assert_eq!(
            (t3.num_vertices(), t3.num_cells(), t3.euler_characteristic()),
            (64, 384, 0)
        );
        assert!(t3.is_closed());
    }

    #[test]
    fn torus_resolution_errors() {
        let c = CollarSpec::new(SigmaModel::Circle, 0.4, 4);
        assert!(build_torus_mesh(2, 3, Some(&c)).is_err());
        assert!(matches!(
            build_torus_mesh(2, 5, Some(&c)),
            Err(Error::Resolution(_))
        ));
        let m = build_torus_mesh(2, 8, Some(&c)).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.is_closed());
    }

    #[test]
    fn sphere_counts() {
        let s = build_sphere_mesh(2, 0, None).unwrap();
        assert_eq!(
            (s.num_vertices(), s.num_cells(), s.euler_characteristic()),
            (12, 20, 2)
        );
        let s = build_sphere_mesh(3, 0, None).unwrap();
        assert_eq!(
            (s.num_vertices(), s.num_cells(), s.euler_characteristic()),
            (8, 16, 0)
        );
        let s = build_sphere_mesh(2, 2, None).unwrap();
        assert_eq!(
            (s.num_vertices(), s.num_cells(), s.euler_characteristic()),
            (162, 320, 2)
        );
    }

    #[test]
    fn capsule_collar_data() {
        let c = CollarSpec::new(SigmaModel::Sphere2, 0.4, 8);
        let m = build_sphere_mesh(3, 1, Some(&c)).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.is_closed());
        let collar = m.collar_vertices(Some(0));
        for v in 0..m.num_vertices() {
            if collar[v] {
                let x = m.collar_x[v].expect("collar vertex has x");
                assert!((-1.0..=1.0).contains(&x));
                assert_eq!(m.exterior_depth[v], 0.0);
            }
        }
        // cross-layer collar chord equals Gamma * dx
        let v0 = (0..m.num_vertices())
            .find(|&v| m.collar_x[v] == Some(0.0))
            .unwrap();
        let v1 = (0..m.num_vertices())
            .find(|&v| m.collar_x[v] == Some(0.25) && m.edge_id(v0, v).is_some())
            .unwrap();
        assert!((m.coordinate_length(v0, v1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ball_boundary() {
        let c = CollarSpec::new(SigmaModel::Circle, 0.4, 8);
        let m = build_ball_mesh(2, 1, &c).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_facets.len(), 16);
        let c3 = CollarSpec::new(SigmaModel::Sphere2, 0.4, 8);
        let m3 = build_ball_mesh(3, 1, &c3).unwrap();
        assert_eq!(m3.euler_characteristic(), 1);
        assert!(build_ball_mesh(3, 1, &CollarSpec::new(SigmaModel::Sphere2, 0.4, 40)).is_err());
        assert!(build_ball_mesh(3, 0, &c3).is_err());
    }
}
