use serde::{Deserialize, Serialize};

use super::{Geometry, Region, SimplicialMesh};
use crate::error::{Error, Result};

pub const MESH_FORMAT_VERSION: u32 = 1;

/// JSON form of a mesh. `lengths` optionally carries an edge-length metric
/// as `[i, j, length]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub version: u32,
    pub dim: usize,
    pub coords: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    pub region: Vec<Region>,
    pub collar_x: Vec<Option<f64>>,
    #[serde(default)]
    pub exterior_depth: Option<Vec<f64>>,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<(usize, usize, f64)>>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &SimplicialMesh) -> Self {
        Self {
            version: MESH_FORMAT_VERSION,
            dim: mesh.dim,
            coords: mesh.coords.clone(),
            cells: mesh.cells.clone(),
            region: mesh.region.clone(),
            collar_x: mesh.collar_x.clone(),
            exterior_depth: Some(mesh.exterior_depth.clone()),
            geometry: Some(mesh.geometry.clone()),
            lengths: None,
        }
    }

    pub fn into_mesh(self) -> Result<SimplicialMesh> {
        if self.version != MESH_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported mesh format version {} (expected {MESH_FORMAT_VERSION})",
                self.version
            )));
        }
        let nv = self.coords.len();
        let mut mesh = SimplicialMesh::new(
            self.dim,
            self.coords,
            self.cells,
            self.geometry.unwrap_or(Geometry::Embedded),
        )?;
        let depth = self.exterior_depth.unwrap_or_else(|| vec![0.0; nv]);
        mesh.set_collar_data(self.region, self.collar_x, depth)?;
        Ok(mesh)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_ball_mesh, CollarSpec, SigmaModel};

    #[test]
    fn round_trip_is_stable() {
        let c = CollarSpec::new(SigmaModel::Circle, 0.4, 8);
        let mesh = build_ball_mesh(2, 1, &c).unwrap();
        let file = MeshFile::from_mesh(&mesh);
        let text = file.to_json().unwrap();
        let back = MeshFile::from_json(&text).unwrap();
        assert_eq!(file, back);
        let again = back.into_mesh().unwrap();
        assert_eq!(again.cells, mesh.cells);
        assert_eq!(again.collar_x, mesh.collar_x);
        assert_eq!(MeshFile::from_mesh(&again).to_json().unwrap(), text);
    }
}
