use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{coord_key, DomainGeometry, Mesh, Point, Shape};
use crate::error::{Error, Result};

/// Vertical layer law for each half of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Grading {
    Uniform,
    /// Layer thicknesses shrink by `ratio` per layer towards `y = 0`.
    Geometric { ratio: f64 },
}

impl Grading {
    pub fn ratio(&self) -> f64 {
        match *self {
            Grading::Uniform => 1.0,
            Grading::Geometric { ratio } => ratio,
        }
    }
}

/// Layer thicknesses of one half, ordered from the outer boundary towards
/// the conduit. They sum to `half_height`.
pub fn layer_thicknesses(half_height: f64, ny: usize, grading: Grading) -> Result<Vec<f64>> {
    if ny == 0 {
        return Err(Error::InvalidMeshParameters("ny must be at least 1".into()));
    }
    let q = grading.ratio();
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidMeshParameters(format!(
            "grading ratio must lie in (0, 1], got {q}"
        )));
    }
    if q == 1.0 {
        return Ok(vec![half_height / ny as f64; ny]);
    }
    let first = half_height * (1.0 - q) / (1.0 - q.powi(ny as i32));
    Ok((0..ny).map(|i| first * q.powi(i as i32)).collect())
}

/// Tensor-product rectangle mesh, uniform in `x` and graded towards the
/// conduit in `y`, mirror-symmetric about `y = 0`.
pub fn build_graded_mesh(
    geometry: DomainGeometry,
    nx: usize,
    ny: usize,
    grading: Grading,
) -> Result<Mesh> {
    geometry.validate()?;
    if nx == 0 {
        return Err(Error::InvalidMeshParameters("nx must be at least 1".into()));
    }
    let layers = layer_thicknesses(geometry.half_height, ny, grading)?;
    let xs: Vec<f64> = (0..=nx)
        .map(|i| {
            if i == nx {
                geometry.length
            } else {
                geometry.length * i as f64 / nx as f64
            }
        })
        .collect();
    // upper lines from the conduit outwards, smallest layer first
    let mut upper = vec![0.0];
    let mut acc = 0.0;
    for (i, t) in layers.iter().rev().enumerate() {
        acc += t;
        upper.push(if i + 1 == ny { geometry.half_height } else { acc });
    }
    let mut ys: Vec<f64> = upper.iter().skip(1).rev().map(|y| -y).collect();
    ys.extend_from_slice(&upper);
    mesh_from_grid(geometry, &xs, &ys)
}

pub(crate) fn mesh_from_grid(geometry: DomainGeometry, xs: &[f64], ys: &[f64]) -> Result<Mesh> {
    let mut boxes = Vec::with_capacity((xs.len() - 1) * (ys.len() - 1));
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            boxes.push([xs[i], xs[i + 1], ys[j], ys[j + 1]]);
        }
    }
    mesh_from_boxes(geometry, &boxes)
}

/// Builds a rectangle mesh from `[x0, x1, y0, y1]` boxes, merging coincident
/// corners exactly.
pub(crate) fn mesh_from_boxes(geometry: DomainGeometry, boxes: &[[f64; 4]]) -> Result<Mesh> {
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vid = |p: Point| -> usize {
        *index.entry(coord_key(&p)).or_insert_with(|| {
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let connectivity: Vec<Vec<usize>> = boxes
        .iter()
        .map(|&[x0, x1, y0, y1]| {
            vec![
                vid(Point::new(x0, y0)),
                vid(Point::new(x1, y0)),
                vid(Point::new(x1, y1)),
                vid(Point::new(x0, y1)),
            ]
        })
        .collect();
    Mesh::from_parts(geometry, vertices, connectivity)
}

/// Splits every rectangle along its SW-NE diagonal.
pub fn split_to_triangles(mesh: &Mesh) -> Result<Mesh> {
    if mesh.elements().iter().any(|e| e.shape == Shape::Triangle) {
        return Err(Error::AlreadyTriangulated);
    }
    let connectivity = mesh
        .elements()
        .iter()
        .flat_map(|el| {
            let [sw, se, ne, nw] = [el.vertices[0], el.vertices[1], el.vertices[2], el.vertices[3]];
            [vec![sw, se, ne], vec![sw, ne, nw]]
        })
        .collect();
    Mesh::from_parts(*mesh.geometry(), mesh.vertices().to_vec(), connectivity)
}

/// Geometric mesh whose conduit-adjacent elements have aspect ratio
/// `aspect_ratio` while the outermost layer stays close to square.
///
/// The number of layers and the ratio are chosen so that the first layer
/// has thickness about `L / nx` and the last exactly `L / (nx * aspect_ratio)`.
pub fn aspect_ratio_mesh(geometry: DomainGeometry, nx: usize, aspect_ratio: f64) -> Result<Mesh> {
    let (ny, grading) = aspect_ratio_layers(geometry, nx, aspect_ratio)?;
    build_graded_mesh(geometry, nx, ny, grading)
}

pub(crate) fn aspect_ratio_layers(
    geometry: DomainGeometry,
    nx: usize,
    aspect_ratio: f64,
) -> Result<(usize, Grading)> {
    geometry.validate()?;
    if nx == 0 || !(aspect_ratio >= 1.0) {
        return Err(Error::InvalidMeshParameters(format!(
            "need nx >= 1 and aspect ratio >= 1, got {nx}, {aspect_ratio}"
        )));
    }
    let hx = geometry.length / nx as f64;
    let rel = geometry.half_height / hx;
    if aspect_ratio == 1.0 || rel <= 1.0 {
        let ny = rel.round().max(1.0) as usize;
        return Ok((ny, Grading::Uniform));
    }
    // continuous estimate with a first layer of thickness hx
    let q0 = (rel - 1.0) / (rel - 1.0 / aspect_ratio);
    let ny = (1.0 + (1.0 / aspect_ratio).ln() / q0.ln()).round().max(2.0) as usize;
    let target = hx / aspect_ratio;
    let smallest = |q: f64| -> f64 {
        let layers = layer_thicknesses(geometry.half_height, ny, Grading::Geometric { ratio: q })
            .expect("valid ratio");
        layers[ny - 1]
    };
    if geometry.half_height / (ny as f64) < target {
        return Err(Error::InvalidMeshParameters(format!(
            "cannot reach aspect ratio {aspect_ratio} with {ny} layers"
        )));
    }
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if smallest(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((ny, Grading::Geometric { ratio: 0.5 * (lo + hi) }))
}
