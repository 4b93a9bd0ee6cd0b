use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DomainGeometry, Mesh, Point, Subdomain};
use crate::error::{Error, Result};

const FORMAT: &str = "karst-mesh";
const VERSION: u32 = 1;

/// JSON form of a mesh. See `schemas/mesh.schema.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDocument {
    pub format: String,
    pub version: u32,
    pub geometry: DomainGeometry,
    pub vertices: VertexArrays,
    pub elements: ElementArrays,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexArrays {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementArrays {
    pub connectivity: Vec<Vec<usize>>,
    pub subdomain: Vec<Subdomain>,
}

impl MeshDocument {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        MeshDocument {
            format: FORMAT.into(),
            version: VERSION,
            geometry: *mesh.geometry(),
            vertices: VertexArrays {
                x: mesh.vertices().iter().map(|p| p.x).collect(),
                y: mesh.vertices().iter().map(|p| p.y).collect(),
            },
            elements: ElementArrays {
                connectivity: mesh.elements().iter().map(|e| e.vertices.clone()).collect(),
                subdomain: mesh.elements().iter().map(|e| e.subdomain).collect(),
            },
        }
    }

    /// Rebuilds the mesh and checks the stored subdomain tags against the
    /// recomputed ones.
    pub fn to_mesh(&self) -> Result<Mesh> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::InvalidMesh(format!(
                "unsupported mesh document {} v{}",
                self.format, self.version
            )));
        }
        if self.vertices.x.len() != self.vertices.y.len() {
            return Err(Error::InvalidMesh("vertex arrays differ in length".into()));
        }
        if self.elements.connectivity.len() != self.elements.subdomain.len() {
            return Err(Error::InvalidMesh("element arrays differ in length".into()));
        }
        let vertices = self
            .vertices
            .x
            .iter()
            .zip(&self.vertices.y)
            .map(|(&x, &y)| Point::new(x, y))
            .collect();
        let mesh = Mesh::from_parts(self.geometry, vertices, self.elements.connectivity.clone())?;
        for (k, (el, tag)) in mesh.elements().iter().zip(&self.elements.subdomain).enumerate() {
            if el.subdomain != *tag {
                return Err(Error::InvalidMesh(format!(
                    "element {k} tagged {tag:?} but lies in {:?}",
                    el.subdomain
                )));
            }
        }
        Ok(mesh)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
