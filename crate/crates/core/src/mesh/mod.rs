//! Interface-conforming meshes of the aquifer domain.
//!
//! The domain is `(0, L) x (-H, H)` with the conduit on `y = 0`. Every
//! element lies in either the upper or the lower half, so the conduit is a
//! union of mesh edges. Meshes are immutable once built; refinement and
//! splitting produce new values.

mod build;
mod diagnostics;
mod io;
mod refine;

use std::collections::HashMap;

use nalgebra::{Matrix2, Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{
    aspect_ratio_mesh, build_graded_mesh, layer_thicknesses, split_to_triangles, Grading,
};
pub use diagnostics::{check_mesh_assumptions, MeshDiagnostics, DEFAULT_RATIO_THRESHOLD};
pub use io::MeshDocument;
pub use refine::refine;

pub type Point = Point2<f64>;
pub type Vector = Vector2<f64>;

/// Horizontal extent `L` and matrix half-height `H` of the aquifer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainGeometry {
    pub length: f64,
    pub half_height: f64,
}

impl DomainGeometry {
    pub fn new(length: f64, half_height: f64) -> Result<Self> {
        let geom = DomainGeometry {
            length,
            half_height,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "length must be positive, got {}",
                self.length
            )));
        }
        if !(self.half_height > 0.0 && self.half_height.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "half_height must be positive, got {}",
                self.half_height
            )));
        }
        Ok(())
    }

    /// Area of the matrix domain, `2 L H`.
    pub fn area(&self) -> f64 {
        2.0 * self.length * self.half_height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rectangle,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subdomain {
    Upper,
    Lower,
}

/// Principal stretching directions of an element.
///
/// `p1` is the longest direction. `c_matrix` holds `p1`, `p2` as columns so
/// that `C^T C = diag(h1^2, h2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyData {
    pub p1: Vector,
    pub p2: Vector,
    pub h1: f64,
    pub h2: f64,
}

impl AnisotropyData {
    fn from_vectors(p1: Vector, p2: Vector) -> Self {
        AnisotropyData {
            p1,
            p2,
            h1: p1.norm(),
            h2: p2.norm(),
        }
    }

    pub fn h_min(&self) -> f64 {
        self.h2
    }

    pub fn c_matrix(&self) -> Matrix2<f64> {
        Matrix2::from_columns(&[self.p1, self.p2])
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.h1 / self.h2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub shape: Shape,
    /// Rectangles: SW, SE, NE, NW. Triangles: counter-clockwise.
    pub vertices: Vec<usize>,
    /// Local edge `i` joins local vertices `i` and `i + 1`.
    pub edges: Vec<usize>,
    pub subdomain: Subdomain,
    pub anisotropy: AnisotropyData,
    pub area: f64,
    /// Largest vertex-to-vertex distance.
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLocation {
    InteriorMatrix,
    Conduit,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Ordered lexicographically by `(x, y)`; this order fixes the edge
    /// parametrisation used by edge bubbles and higher-order edge nodes.
    pub vertices: [usize; 2],
    /// Element on the side `n_E` points away from (the only element on a
    /// boundary edge, where `n_E` is the outer normal).
    pub minus: usize,
    /// Element `n_E` points into.
    pub plus: Option<usize>,
    pub normal: Vector,
    pub tangent: Vector,
    pub length: f64,
    /// Averaged height `(h_{E,K1} + h_{E,K2}) / 2`.
    pub h_e: f64,
    /// Averaged minimal length `(h_min,K1 + h_min,K2) / 2`.
    pub h_min_e: f64,
    pub location: EdgeLocation,
}

impl Edge {
    /// Incident elements, minus side first.
    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.minus).chain(self.plus)
    }

    pub fn is_boundary(&self) -> bool {
        self.plus.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    geometry: DomainGeometry,
    vertices: Vec<Point>,
    elements: Vec<Element>,
    edges: Vec<Edge>,
    conduit_edges: Vec<usize>,
    vertex_elements: Vec<Vec<usize>>,
    element_neighbors: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

fn coord_key(p: &Point) -> (u64, u64) {
    // -0.0 and 0.0 must hash identically
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

fn lex_less(a: &Point, b: &Point) -> bool {
    a.x < b.x || (a.x == b.x && a.y < b.y)
}

impl Mesh {
    /// Builds a mesh from raw connectivity, computing edges, normals,
    /// anisotropy data and patches, and checking the structural invariants.
    pub fn from_parts(
        geometry: DomainGeometry,
        vertices: Vec<Point>,
        connectivity: Vec<Vec<usize>>,
    ) -> Result<Mesh> {
        geometry.validate()?;
        if connectivity.is_empty() {
            return Err(Error::InvalidMesh("mesh has no elements".into()));
        }
        let scale = geometry.length.max(geometry.half_height);
        let tol = 1e-12 * scale;

        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
            }
            if v.x < -tol
                || v.x > geometry.length + tol
                || v.y.abs() > geometry.half_height + tol
            {
                return Err(Error::InvalidMesh(format!(
                    "vertex {i} ({}, {}) lies outside the domain",
                    v.x, v.y
                )));
            }
        }

        let mut elements = Vec::with_capacity(connectivity.len());
        for (k, conn) in connectivity.into_iter().enumerate() {
            if conn.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "element {k} references a missing vertex"
                )));
            }
            let pts: Vec<Point> = conn.iter().map(|&v| vertices[v]).collect();
            let shape = match conn.len() {
                3 => Shape::Triangle,
                4 => Shape::Rectangle,
                n => {
                    return Err(Error::InvalidMesh(format!(
                        "element {k} has {n} vertices"
                    )))
                }
            };
            let subdomain = if pts.iter().all(|p| p.y >= -tol) {
                Subdomain::Upper
            } else if pts.iter().all(|p| p.y <= tol) {
                Subdomain::Lower
            } else {
                return Err(Error::InvalidMesh(format!("element {k} crosses y = 0")));
            };
            let (anisotropy, area) = match shape {
                Shape::Rectangle => rectangle_anisotropy(k, &pts, tol)?,
                Shape::Triangle => triangle_anisotropy(k, &pts, tol)?,
            };
            let mut diameter: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    diameter = diameter.max((a - b).norm());
                }
            }
            elements.push(Element {
                shape,
                vertices: conn,
                edges: Vec::new(),
                subdomain,
                anisotropy,
                area,
                diameter,
            });
        }

        let first_shape = elements[0].shape;
        if elements.iter().any(|e| e.shape != first_shape) {
            return Err(Error::InvalidMesh(
                "mixed triangle/rectangle meshes are not supported".into(),
            ));
        }

        // edges keyed by their sorted vertex pair
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_elems: Vec<Vec<usize>> = Vec::new();
        let mut edge_verts: Vec<[usize; 2]> = Vec::new();
        for (k, el) in elements.iter_mut().enumerate() {
            let n = el.vertices.len();
            for i in 0..n {
                let a = el.vertices[i];
                let b = el.vertices[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                let id = *edge_index.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    edge_verts.push(if lex_less(&pa, &pb) { [a, b] } else { [b, a] });
                    edge_elems.push(Vec::new());
                    edge_verts.len() - 1
                });
                edge_elems[id].push(k);
                el.edges.push(id);
            }
        }

        let mut edges = Vec::with_capacity(edge_verts.len());
        for (id, (verts, elems)) in edge_verts.iter().zip(&edge_elems).enumerate() {
            let (pa, pb) = (vertices[verts[0]], vertices[verts[1]]);
            let d = pb - pa;
            let length = d.norm();
            if length <= tol {
                return Err(Error::InvalidMesh(format!("edge {id} is degenerate")));
            }
            let mid = Point::from((pa.coords + pb.coords) * 0.5);
            let mut normal = Vector::new(d.y, -d.x) / length;
            let side = |k: usize, n: &Vector| -> f64 {
                let c = centroid(&elements[k], &vertices);
                (c - mid).dot(n)
            };
            let (minus, plus, location) = match elems.as_slice() {
                [k] => {
                    // outer normal: the element lies on the minus side
                    if side(*k, &normal) > 0.0 {
                        normal = -normal;
                    }
                    (*k, None, EdgeLocation::Boundary)
                }
                [k1, k2] => {
                    if normal.y < 0.0 || (normal.y == 0.0 && normal.x < 0.0) {
                        normal = -normal;
                    }
                    let (minus, plus) = if side(*k1, &normal) > 0.0 { (*k2, *k1) } else { (*k1, *k2) };
                    let on_conduit = pa.y.abs() <= tol && pb.y.abs() <= tol;
                    let loc = if on_conduit {
                        EdgeLocation::Conduit
                    } else {
                        EdgeLocation::InteriorMatrix
                    };
                    (minus, Some(plus), loc)
                }
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {id} has {} incident elements",
                        elems.len()
                    )))
                }
            };
            let tangent = Vector::new(-normal.y, normal.x);
            let heights: Vec<f64> = elems.iter().map(|&k| elements[k].area / length).collect();
            let hmins: Vec<f64> = elems
                .iter()
                .map(|&k| elements[k].anisotropy.h_min())
                .collect();
            let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            edges.push(Edge {
                vertices: *verts,
                minus,
                plus,
                normal,
                tangent,
                length,
                h_e: avg(&heights),
                h_min_e: avg(&hmins),
                location,
            });
        }

        let mut conduit_edges: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.location == EdgeLocation::Conduit)
            .map(|(i, _)| i)
            .collect();
        conduit_edges.sort_by(|&a, &b| {
            let xa = vertices[edges[a].vertices[0]].x;
            let xb = vertices[edges[b].vertices[0]].x;
            xa.total_cmp(&xb)
        });

        let mut vertex_elements = vec![Vec::new(); vertices.len()];
        for (k, el) in elements.iter().enumerate() {
            for &v in &el.vertices {
                vertex_elements[v].push(k);
            }
        }
        let mut element_neighbors = vec![Vec::new(); elements.len()];
        for e in &edges {
            if let Some(p) = e.plus {
                element_neighbors[e.minus].push(p);
                element_neighbors[p].push(e.minus);
            }
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.vertices[0]] = true;
            boundary_vertex[e.vertices[1]] = true;
        }

        let mesh = Mesh {
            geometry,
            vertices,
            elements,
            edges,
            conduit_edges,
            vertex_elements,
            element_neighbors,
            boundary_vertex,
        };
        mesh.check_conduit_tiling(tol)?;
        Ok(mesh)
    }

    fn check_conduit_tiling(&self, tol: f64) -> Result<()> {
        let mut x = 0.0;
        for &e in &self.conduit_edges {
            let [a, b] = self.edges[e].vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            if (pa.x - x).abs() > tol {
                return Err(Error::InvalidMesh(format!(
                    "conduit edges do not tile [0, L]: gap at x = {x}"
                )));
            }
            x = pb.x;
        }
        if (x - self.geometry.length).abs() > tol {
            return Err(Error::InvalidMesh(format!(
                "conduit edges end at x = {x}, expected {}",
                self.geometry.length
            )));
        }
        Ok(())
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geometry
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &Element {
        &self.elements[k]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Conduit edges ordered by increasing `x`.
    pub fn conduit_edges(&self) -> &[usize] {
        &self.conduit_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn shape(&self) -> Shape {
        self.elements[0].shape
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn element_points(&self, k: usize) -> Vec<Point> {
        self.elements[k]
            .vertices
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.edges[e].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn centroid(&self, k: usize) -> Point {
        centroid(&self.elements[k], &self.vertices)
    }

    /// `h_{E,K} = |K| / |E|`.
    pub fn edge_height(&self, e: usize, k: usize) -> f64 {
        self.elements[k].area / self.edges[e].length
    }

    /// Face neighbours of `k` (elements sharing an edge).
    pub fn face_neighbors(&self, k: usize) -> &[usize] {
        &self.element_neighbors[k]
    }

    /// `W_K`: the element together with its face neighbours.
    pub fn element_patch(&self, k: usize) -> Vec<usize> {
        let mut patch = vec![k];
        patch.extend_from_slice(&self.element_neighbors[k]);
        patch
    }

    /// `W_E`: the one or two elements sharing the edge.
    pub fn edge_patch(&self, e: usize) -> Vec<usize> {
        self.edges[e].elements().collect()
    }

    /// `W_x`: all elements having the vertex as a node.
    pub fn vertex_patch(&self, v: usize) -> &[usize] {
        &self.vertex_elements[v]
    }

    /// Local index of `edge` within `element`, if it belongs to it.
    pub fn local_edge(&self, element: usize, edge: usize) -> Option<usize> {
        self.elements[element].edges.iter().position(|&e| e == edge)
    }

    /// Number of vertices lying strictly inside some edge. Zero for every
    /// conforming mesh.
    pub fn hanging_node_count(&self) -> usize {
        let scale = self.geometry.length.max(self.geometry.half_height);
        let tol = 1e-12 * scale;
        let mut count = 0;
        // vertices bucketed on a coarse grid keep this close to linear
        let nb = (self.vertices.len() as f64).sqrt().ceil() as usize + 1;
        let cell_x = self.geometry.length / nb as f64;
        let cell_y = 2.0 * self.geometry.half_height / nb as f64;
        let bucket = |p: &Point| -> (usize, usize) {
            let i = ((p.x / cell_x).floor().max(0.0) as usize).min(nb - 1);
            let j = (((p.y + self.geometry.half_height) / cell_y).floor().max(0.0) as usize)
                .min(nb - 1);
            (i, j)
        };
        let mut grid: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, p) in self.vertices.iter().enumerate() {
            grid.entry(bucket(p)).or_default().push(i);
        }
        for e in &self.edges {
            let [a, b] = e.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let (ia, ja) = bucket(&pa);
            let (ib, jb) = bucket(&pb);
            for i in ia.min(ib)..=ia.max(ib) {
                for j in ja.min(jb)..=ja.max(jb) {
                    let Some(cands) = grid.get(&(i, j)) else {
                        continue;
                    };
                    for &v in cands {
                        if v == a || v == b {
                            continue;
                        }
                        let p = self.vertices[v];
                        let d = pb - pa;
                        let t = (p - pa).dot(&d) / d.norm_squared();
                        let off = (pa + d * t - p).norm();
                        if t > 1e-12 && t < 1.0 - 1e-12 && off <= tol {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    /// Locates an element containing `p` by brute force over a bucket index.
    pub fn locator(&self) -> PointLocator<'_> {
        PointLocator::new(self)
    }
}

fn centroid(el: &Element, vertices: &[Point]) -> Point {
    let n = el.vertices.len() as f64;
    let s = el
        .vertices
        .iter()
        .fold(Vector::zeros(), |acc, &v| acc + vertices[v].coords);
    Point::from(s / n)
}

fn rectangle_anisotropy(k: usize, pts: &[Point], tol: f64) -> Result<(AnisotropyData, f64)> {
    let (sw, se, ne, nw) = (pts[0], pts[1], pts[2], pts[3]);
    let a = se - sw;
    let b = nw - sw;
    let axis_aligned = a.y.abs() <= tol
        && b.x.abs() <= tol
        && a.x > tol
        && b.y > tol
        && ((ne - se) - b).norm() <= tol
        && ((ne - nw) - a).norm() <= tol;
    if !axis_aligned {
        return Err(Error::InvalidMesh(format!(
            "element {k} is not an axis-aligned rectangle in SW, SE, NE, NW order"
        )));
    }
    let a = Vector::new(a.x, 0.0);
    let b = Vector::new(0.0, b.y);
    // ties prefer the x-aligned direction as p1
    let aniso = if a.norm() >= b.norm() {
        AnisotropyData::from_vectors(a, b)
    } else {
        AnisotropyData::from_vectors(b, a)
    };
    Ok((aniso, a.x * b.y))
}

fn triangle_anisotropy(k: usize, pts: &[Point], tol: f64) -> Result<(AnisotropyData, f64)> {
    let e1 = pts[1] - pts[0];
    let e2 = pts[2] - pts[0];
    let det = e1.x * e2.y - e1.y * e2.x;
    if det <= tol * tol {
        return Err(Error::InvalidMesh(format!(
            "triangle {k} is degenerate or clockwise"
        )));
    }
    let area = 0.5 * det;
    let mut best = 0;
    let mut best_len = -1.0;
    for i in 0..3 {
        let len = (pts[(i + 1) % 3] - pts[i]).norm();
        if len > best_len * (1.0 + 1e-14) {
            best = i;
            best_len = len;
        }
    }
    let (mut p0, mut p1) = (pts[best], pts[(best + 1) % 3]);
    if lex_less(&p1, &p0) {
        std::mem::swap(&mut p0, &mut p1);
    }
    let p2 = pts[(best + 2) % 3];
    let dir = p1 - p0;
    let unit = dir / dir.norm();
    let foot = p0 + unit * (p2 - p0).dot(&unit);
    let height = p2 - foot;
    Ok((AnisotropyData::from_vectors(dir, height), area))
}

/// Bucketed point location over a mesh.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    fn new(mesh: &'a Mesh) -> Self {
        let n = ((mesh.num_elements() as f64).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (n, n);
        let mut buckets = vec![Vec::new(); nx * ny];
        let g = mesh.geometry;
        for (k, _) in mesh.elements.iter().enumerate() {
            let pts = mesh.element_points(k);
            let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for p in &pts {
                x0 = x0.min(p.x);
                x1 = x1.max(p.x);
                y0 = y0.min(p.y);
                y1 = y1.max(p.y);
            }
            let (i0, j0) = Self::cell(&g, nx, ny, x0, y0);
            let (i1, j1) = Self::cell(&g, nx, ny, x1, y1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push(k);
                }
            }
        }
        PointLocator {
            mesh,
            nx,
            ny,
            buckets,
        }
    }

    fn cell(g: &DomainGeometry, nx: usize, ny: usize, x: f64, y: f64) -> (usize, usize) {
        let i = ((x / g.length * nx as f64).floor().max(0.0) as usize).min(nx - 1);
        let j = (((y + g.half_height) / (2.0 * g.half_height) * ny as f64)
            .floor()
            .max(0.0) as usize)
            .min(ny - 1);
        (i, j)
    }

    /// An element containing `p` (closed), if any.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let (i, j) = Self::cell(&self.mesh.geometry, self.nx, self.ny, p.x, p.y);
        let tol = 1e-12 * self.mesh.geometry.length.max(self.mesh.geometry.half_height);
        self.buckets[j * self.nx + i]
            .iter()
            .copied()
            .find(|&k| contains(self.mesh, k, p, tol))
    }
}

fn contains(mesh: &Mesh, k: usize, p: &Point, tol: f64) -> bool {
    let pts = mesh.element_points(k);
    let n = pts.len();
    (0..n).all(|i| {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let d = b - a;
        let w = p - a;
        d.x * w.y - d.y * w.x >= -tol * d.norm()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DomainGeometry {
        DomainGeometry::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(DomainGeometry::new(0.0, 1.0).is_err());
        assert!(DomainGeometry::new(1.0, -1.0).is_err());
        assert!(DomainGeometry::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn rejects_element_crossing_interface() {
        let v = vec![
            Point::new(0.0, -1.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let err = Mesh::from_parts(unit(), v, vec![vec![0, 1, 2, 3]]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn unit_pair_normals_and_heights() {
        let mesh = build_graded_mesh(unit(), 1, 1, crate::mesh::Grading::Uniform).unwrap();
        assert_eq!(mesh.num_elements(), 2);
        let conduit = mesh.conduit_edges();
        assert_eq!(conduit.len(), 1);
        let e = mesh.edge(conduit[0]);
        assert_eq!(e.normal, Vector::new(0.0, 1.0));
        assert_eq!(e.tangent, Vector::new(-1.0, 0.0));
        assert_eq!(mesh.element(e.plus.unwrap()).subdomain, Subdomain::Upper);
        assert_eq!(e.h_e, 1.0);
        for edge in mesh.edges().iter().filter(|e| e.is_boundary()) {
            let c = mesh.centroid(edge.minus);
            let [a, _] = mesh.edge_points(mesh.edges().iter().position(|x| x == edge).unwrap());
            assert!((c - a).dot(&edge.normal) < 0.0, "boundary normal must point outward");
        }
    }

    #[test]
    fn locator_finds_points() {
        let mesh = build_graded_mesh(unit(), 4, 3, crate::mesh::Grading::Geometric { ratio: 0.5 })
            .unwrap();
        let loc = mesh.locator();
        for &(x, y) in &[(0.1, 0.05), (0.9, -0.9), (0.5, 0.5), (0.0, 0.0), (1.0, 1.0)] {
            let p = Point::new(x, y);
            let k = loc.locate(&p).expect("point inside domain");
            assert!(contains(&mesh, k, &p, 1e-12));
        }
    }
}
