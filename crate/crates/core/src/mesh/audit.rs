use serde::{Deserialize, Serialize};

use super::{Region, SimplicialMesh};
use crate::metric::simplex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub pass: bool,
    pub euler_characteristic: i64,
    pub face_counts: Vec<usize>,
    pub collar_cells: Vec<usize>,
    pub exterior_cells: usize,
    pub transition_cells: usize,
    pub boundary_facets: usize,
    pub min_quality: f64,
    pub max_quality: f64,
    pub violations: Vec<String>,
}

/// Checks the manifold, orientation and collar invariants of a mesh.
pub fn mesh_audit(mesh: &SimplicialMesh) -> AuditReport {
    let mut violations = Vec::new();

    let mut facet_list: Vec<_> = mesh.facet_incidence().into_iter().collect();
    facet_list.sort();
    let mut single = Vec::new();
    for (facet, inc) in &facet_list {
        match inc.len() {
            1 => single.push(facet.clone()),
            2 => {
                let (c0, i0) = inc[0];
                let (c1, i1) = inc[1];
                if mesh.induced_sign(c0, i0) == mesh.induced_sign(c1, i1) {
                    violations.push(format!(
                        "orientation flip across facet {facet:?} (cells {c0}, {c1})"
                    ));
                }
            }
            k => violations.push(format!(
                "non-manifold facet {facet:?} with {k} incident cells"
            )),
        }
    }
    let mut declared: Vec<Vec<usize>> = mesh
        .boundary_facets
        .iter()
        .map(|f| super::sorted(f))
        .collect();
    declared.sort();
    if declared != single {
        for f in single.iter().filter(|f| declared.binary_search(f).is_err()) {
            violations.push(format!("facet {f:?} has a single incident cell"));
        }
        for f in declared.iter().filter(|f| single.binary_search(f).is_err()) {
            violations.push(format!("declared boundary facet {f:?} is interior"));
        }
    }

    let mut collar_cells = vec![0usize; mesh.collar_count()];
    let (mut exterior_cells, mut transition_cells) = (0, 0);
    for (c, cell) in mesh.cells.iter().enumerate() {
        match mesh.region[c] {
            Region::Collar(i) => {
                collar_cells[i] += 1;
                for &v in cell {
                    match mesh.collar_x[v] {
                        None => violations
                            .push(format!("collar_x gap at vertex {v} of collar cell {c}")),
                        Some(x) if !(-1.0..=1.0).contains(&x) => {
                            violations.push(format!("collar_x = {x} out of range at vertex {v}"))
                        }
                        _ => {}
                    }
                }
            }
            Region::Exterior => exterior_cells += 1,
            Region::Transition => transition_cells += 1,
        }
    }

    let (mut min_q, mut max_q) = (f64::INFINITY, 0.0f64);
    for c in 0..mesh.num_cells() {
        let q = simplex::quality(mesh.dim, &mesh.cell_coordinate_lengths(c));
        min_q = min_q.min(q);
        max_q = max_q.max(q);
    }
    if mesh.num_cells() == 0 {
        min_q = 0.0;
        violations.push("mesh has no cells".into());
    }

    AuditReport {
        pass: violations.is_empty(),
        euler_characteristic: mesh.euler_characteristic(),
        face_counts: mesh.face_counts(),
        collar_cells,
        exterior_cells,
        transition_cells,
        boundary_facets: mesh.boundary_facets.len(),
        min_quality: min_q,
        max_quality: max_q,
        violations,
    }
}
