use std::collections::{BTreeSet, HashMap};

use super::build::mesh_from_boxes;
use super::{split_to_triangles, Mesh, Shape};
use crate::error::{Error, Result};

type Box2 = [f64; 4];

/// Red refinement of the marked elements followed by conformity closure.
///
/// Marked rectangles are bisected in both directions. Any rectangle with a
/// vertex strictly inside one of its edges is then cut through that vertex,
/// and this repeats until no hanging vertex remains. Cuts only ever reuse
/// existing coordinates, so the sweep terminates.
///
/// Triangle meshes must come from [`split_to_triangles`]: triangle pairs are
/// merged back into their rectangles, refined, and split again. A marked
/// triangle marks its rectangle.
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Result<Mesh> {
    if let Some(&k) = marked.iter().find(|&&k| k >= mesh.num_elements()) {
        return Err(Error::InvalidMeshParameters(format!(
            "marked element {k} does not exist"
        )));
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }
    let (boxes, owner) = match mesh.shape() {
        Shape::Rectangle => {
            let boxes: Vec<Box2> = (0..mesh.num_elements()).map(|k| bounding_box(mesh, k)).collect();
            let owner: Vec<usize> = (0..mesh.num_elements()).collect();
            (boxes, owner)
        }
        Shape::Triangle => pair_triangles(mesh)?,
    };
    let marked_boxes: BTreeSet<usize> = marked.iter().map(|&k| owner[k]).collect();

    let mut refined: Vec<Box2> = Vec::with_capacity(boxes.len() + 4 * marked_boxes.len());
    for (i, b) in boxes.iter().enumerate() {
        if marked_boxes.contains(&i) {
            let xm = 0.5 * (b[0] + b[1]);
            let ym = 0.5 * (b[2] + b[3]);
            refined.extend(cut(b, &[xm], &[ym]));
        } else {
            refined.push(*b);
        }
    }
    let closed = close(refined);
    let rect = mesh_from_boxes(*mesh.geometry(), &closed)?;
    match mesh.shape() {
        Shape::Rectangle => Ok(rect),
        Shape::Triangle => split_to_triangles(&rect),
    }
}

fn bounding_box(mesh: &Mesh, k: usize) -> Box2 {
    let pts = mesh.element_points(k);
    let mut b = [f64::MAX, f64::MIN, f64::MAX, f64::MIN];
    for p in &pts {
        b[0] = b[0].min(p.x);
        b[1] = b[1].max(p.x);
        b[2] = b[2].min(p.y);
        b[3] = b[3].max(p.y);
    }
    b
}

fn key(b: &Box2) -> [u64; 4] {
    b.map(|v| (v + 0.0).to_bits())
}

/// Groups the two triangles of every split rectangle. Returns the boxes in
/// first-seen order and the owning box of every triangle.
fn pair_triangles(mesh: &Mesh) -> Result<(Vec<Box2>, Vec<usize>)> {
    let mut index: HashMap<[u64; 4], usize> = HashMap::new();
    let mut boxes = Vec::new();
    let mut area = Vec::new();
    let mut owner = Vec::with_capacity(mesh.num_elements());
    for k in 0..mesh.num_elements() {
        let b = bounding_box(mesh, k);
        let id = *index.entry(key(&b)).or_insert_with(|| {
            boxes.push(b);
            area.push(0.0);
            boxes.len() - 1
        });
        area[id] += mesh.element(k).area;
        owner.push(id);
    }
    for (b, a) in boxes.iter().zip(&area) {
        let full = (b[1] - b[0]) * (b[3] - b[2]);
        if (a - full).abs() > 1e-12 * full {
            return Err(Error::InvalidMesh(
                "triangle mesh is not a split rectangle mesh".into(),
            ));
        }
    }
    Ok((boxes, owner))
}

fn cut(b: &Box2, xs: &[f64], ys: &[f64]) -> Vec<Box2> {
    let mut xl = vec![b[0]];
    xl.extend_from_slice(xs);
    xl.push(b[1]);
    let mut yl = vec![b[2]];
    yl.extend_from_slice(ys);
    yl.push(b[3]);
    let mut out = Vec::with_capacity((xl.len() - 1) * (yl.len() - 1));
    for j in 0..yl.len() - 1 {
        for i in 0..xl.len() - 1 {
            out.push([xl[i], xl[i + 1], yl[j], yl[j + 1]]);
        }
    }
    out
}

/// Coordinates on a line lying strictly between `lo` and `hi`.
fn interior(line: Option<&Vec<f64>>, lo: f64, hi: f64) -> Vec<f64> {
    let Some(v) = line else {
        return Vec::new();
    };
    let start = v.partition_point(|&c| c <= lo);
    let end = v.partition_point(|&c| c < hi);
    v[start..end].to_vec()
}

fn close(mut boxes: Vec<Box2>) -> Vec<Box2> {
    loop {
        // vertex coordinates per horizontal and vertical line
        let mut rows: HashMap<u64, Vec<f64>> = HashMap::new();
        let mut cols: HashMap<u64, Vec<f64>> = HashMap::new();
        for b in &boxes {
            for (x, y) in [(b[0], b[2]), (b[1], b[2]), (b[1], b[3]), (b[0], b[3])] {
                rows.entry((y + 0.0).to_bits()).or_default().push(x);
                cols.entry((x + 0.0).to_bits()).or_default().push(y);
            }
        }
        for v in rows.values_mut().chain(cols.values_mut()) {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }

        let mut changed = false;
        let mut next = Vec::with_capacity(boxes.len());
        for b in &boxes {
            let row = |y: f64| rows.get(&(y + 0.0).to_bits());
            let col = |x: f64| cols.get(&(x + 0.0).to_bits());
            let mut xs = interior(row(b[2]), b[0], b[1]);
            xs.extend(interior(row(b[3]), b[0], b[1]));
            let mut ys = interior(col(b[0]), b[2], b[3]);
            ys.extend(interior(col(b[1]), b[2], b[3]));
            if xs.is_empty() && ys.is_empty() {
                next.push(*b);
                continue;
            }
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            ys.sort_by(f64::total_cmp);
            ys.dedup();
            changed = true;
            next.extend(cut(b, &xs, &ys));
        }
        boxes = next;
        if !changed {
            return boxes;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded_mesh, DomainGeometry, Grading};

    fn geom() -> DomainGeometry {
        DomainGeometry::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn mark_all_is_uniform() {
        let m = build_graded_mesh(geom(), 2, 2, Grading::Geometric { ratio: 0.5 }).unwrap();
        let all: Vec<usize> = (0..m.num_elements()).collect();
        let r = refine(&m, &all).unwrap();
        assert_eq!(r.num_elements(), 4 * m.num_elements());
        // each child has half the parent's extents
        for (k, e) in m.elements().iter().enumerate() {
            let c = m.centroid(k);
            let child = r.locator().locate(&c).unwrap();
            let a = &r.element(child).anisotropy;
            assert!((a.h1 - e.anisotropy.h1 / 2.0).abs() < 1e-14);
            assert!((a.h2 - e.anisotropy.h2 / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mark_none_is_identity() {
        let m = build_graded_mesh(geom(), 3, 2, Grading::Uniform).unwrap();
        let r = refine(&m, &[]).unwrap();
        assert_eq!(r.vertices(), m.vertices());
        assert_eq!(r.num_elements(), m.num_elements());
    }

    #[test]
    fn single_mark_closes() {
        let m = build_graded_mesh(geom(), 4, 4, Grading::Uniform).unwrap();
        let k = m
            .elements()
            .iter()
            .position(|e| {
                e.vertices.iter().all(|&v| !m.is_boundary_vertex(v))
            })
            .unwrap();
        let r = refine(&m, &[k]).unwrap();
        assert_eq!(r.hanging_node_count(), 0);
        assert!(r.num_elements() >= m.num_elements() + 3);
        let area: f64 = r.elements().iter().map(|e| e.area).sum();
        assert!((area - 2.0).abs() < 1e-12);
    }

    #[test]
    fn triangles_refine_through_pairs() {
        let m = split_to_triangles(&build_graded_mesh(geom(), 2, 2, Grading::Uniform).unwrap())
            .unwrap();
        let r = refine(&m, &[0]).unwrap();
        assert_eq!(r.shape(), Shape::Triangle);
        assert_eq!(r.hanging_node_count(), 0);
        assert!(r.num_elements() > m.num_elements());
    }
}
