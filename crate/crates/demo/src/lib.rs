//! WebAssembly bindings for the browser demo: a two-dimensional capsule
//! (round `S^2` with a circle collar) whose eigenfunctions, nodal curves and
//! PL critical points can be inspected while `eps` changes, plus the
//! conformal smoothing profile.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use nodal_forge::eigen::solve_lowest;
use nodal_forge::fem::{assemble, BoundaryCondition, MassKind};
use nodal_forge::lab::neumann_reference;
use nodal_forge::mesh::{build_sphere_mesh, CollarSpec, SigmaModel, SimplicialMesh};
use nodal_forge::metric::{
    degenerate_metric, reference_metric, EdgeLengthMetric, SmoothingProfile,
};
use nodal_forge::morse::classify_critical_vertices;
use nodal_forge::nodal::{extract_zero_set, nodal_domains, DEFAULT_ZERO_SHIFT};

const MODES: usize = 6;

#[wasm_bindgen]
pub struct Capsule {
    mesh: SimplicialMesh,
    metric: EdgeLengthMetric,
    collar: CollarSpec,
    lambdas: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct MeshView<'a> {
    coords: &'a [Vec<f64>],
    triangles: &'a [Vec<usize>],
    collar_x: &'a [Option<f64>],
}

#[derive(Serialize)]
struct NodalView {
    segments: Vec<[Vec<f64>; 2]>,
    component: Vec<usize>,
    components: usize,
    domains: usize,
}

#[derive(Serialize)]
struct CriticalView {
    points: Vec<(Vec<f64>, usize, bool)>,
    counts_by_index: Vec<usize>,
    alternating_sum: i64,
}

impl Capsule {
    pub fn build(eps: f64, r: f64, layers: usize, refinement: usize) -> nodal_forge::Result<Self> {
        let collar = CollarSpec::new(SigmaModel::Circle, r, layers);
        collar.validate(1)?;
        let mesh = build_sphere_mesh(2, refinement, Some(&collar))?;
        let g0 = reference_metric(&mesh, std::slice::from_ref(&collar))?;
        let metric = if eps < 1.0 {
            degenerate_metric(&g0, &mesh, eps)?
        } else {
            g0
        };
        let ops = assemble(
            &mesh,
            &metric,
            BoundaryCondition::Closed,
            MassKind::Consistent,
        )?;
        let res = solve_lowest(&ops, MODES, 1e-8, 1)?;
        let vectors = res.vectors.iter().map(|v| ops.to_full(v)).collect();
        Ok(Self {
            mesh,
            metric,
            collar,
            lambdas: res.lambdas,
            vectors,
        })
    }

    fn mode(&self, k: usize) -> nodal_forge::Result<&[f64]> {
        self.vectors.get(k).map(|v| v.as_slice()).ok_or_else(|| {
            nodal_forge::Error::InvalidArgument(format!("mode {k} not computed (0..{MODES})"))
        })
    }

    pub fn nodal_view(&self, k: usize) -> nodal_forge::Result<String> {
        let u = self.mode(k)?;
        let nc = extract_zero_set(&self.mesh, &self.metric, u, DEFAULT_ZERO_SHIFT)?;
        let soup = nc.to_soup(&self.mesh);
        let view = NodalView {
            segments: soup
                .elements
                .iter()
                .map(|e| [soup.vertices[e[0]].clone(), soup.vertices[e[1]].clone()])
                .collect(),
            component: soup.component,
            components: nc.components.len(),
            domains: nodal_domains(&self.mesh, &self.metric, u, DEFAULT_ZERO_SHIFT)?.count,
        };
        Ok(serde_json::to_string(&view)?)
    }

    pub fn critical_view(&self, k: usize) -> nodal_forge::Result<String> {
        let rep = classify_critical_vertices(&self.mesh, self.mode(k)?)?;
        let view = CriticalView {
            points: rep
                .points
                .iter()
                .map(|p| (self.mesh.coords[p.vertex].clone(), p.index, p.degenerate))
                .collect(),
            counts_by_index: rep.counts_by_index.clone(),
            alternating_sum: rep.alternating_sum(),
        };
        Ok(serde_json::to_string(&view)?)
    }
}

fn js(e: nodal_forge::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Capsule {
    /// Solves the lowest eigenpairs of the capsule with collar radius `r`
    /// under the degenerate metric `g_eps`.
    #[wasm_bindgen(constructor)]
    pub fn new(eps: f64, r: f64, layers: usize, refinement: usize) -> Result<Capsule, JsError> {
        Self::build(eps, r, layers, refinement).map_err(js)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambdas.clone()
    }

    /// Collar Neumann eigenvalues `(k pi / 2)^2`, the `eps -> 0` limits.
    pub fn targets(&self) -> Vec<f64> {
        neumann_reference(&self.collar, MODES - 1).mu
    }

    pub fn mesh_json(&self) -> String {
        serde_json::to_string(&MeshView {
            coords: &self.mesh.coords,
            triangles: &self.mesh.cells,
            collar_x: &self.mesh.collar_x,
        })
        .unwrap_or_default()
    }

    pub fn values(&self, k: usize) -> Result<Vec<f64>, JsError> {
        self.mode(k).map(|v| v.to_vec()).map_err(js)
    }

    /// Zero set of `u_k` as 3D segments, with component labels and the
    /// nodal domain count.
    pub fn nodal_json(&self, k: usize) -> Result<String, JsError> {
        self.nodal_view(k).map_err(js)
    }

    /// PL critical points of `u_k` with their Morse index.
    pub fn critical_json(&self, k: usize) -> Result<String, JsError> {
        self.critical_view(k).map_err(js)
    }
}

/// Conformal factor across the collar: `1` for `|x| <= 1` and the smoothed
/// transition to `eps` outside. Returns interleaved `x, factor` pairs.
pub fn profile_samples(
    eps: f64,
    delta: f64,
    order: u32,
    samples: usize,
) -> nodal_forge::Result<Vec<f64>> {
    let p = SmoothingProfile::new(eps, delta, order)?;
    let reach = 1.0 + 1.5 * delta;
    let n = samples.max(2);
    Ok((0..n)
        .flat_map(|i| {
            let x = -reach + 2.0 * reach * i as f64 / (n - 1) as f64;
            [x, p.value((x.abs() - 1.0).max(0.0))]
        })
        .collect())
}

#[wasm_bindgen]
pub fn smoothing_profile(
    eps: f64,
    delta: f64,
    order: u32,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    profile_samples(eps, delta, order, samples).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capsule_modes_concentrate() {
        let c = Capsule::build(0.05, 0.3, 12, 2).unwrap();
        assert!(c.lambdas[0].abs() < 1e-8);
        let t = c.targets();
        assert!((c.lambdas[1] - t[1]).abs() / t[1] < 0.1, "{:?}", c.lambdas);
        let nodal: serde_json::Value = serde_json::from_str(&c.nodal_view(1).unwrap()).unwrap();
        assert_eq!(nodal["components"], 1);
        assert_eq!(nodal["domains"], 2);
        let crit: serde_json::Value = serde_json::from_str(&c.critical_view(1).unwrap()).unwrap();
        assert_eq!(crit["alternating_sum"], 2);
        assert!(c.nodal_view(MODES).is_err());
    }

    #[test]
    fn profile_is_one_on_the_collar() {
        let s = profile_samples(0.1, 0.2, 3, 101).unwrap();
        for xy in s.chunks(2) {
            if xy[0].abs() <= 1.0 {
                assert_eq!(xy[1], 1.0);
            }
            assert!(xy[1] >= 0.1 - 1e-15 && xy[1] <= 1.0);
        }
        assert!((s[1] - 0.1).abs() < 1e-15);
        assert!(profile_samples(0.0, 0.2, 3, 10).is_err());
    }
}
