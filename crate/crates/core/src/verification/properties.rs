//! Randomised property checks with measured constants. Each suite returns
//! a [`SuiteResult`]; failures are recorded, never raised.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ErrorDistribution, ManufacturedCase, NormKind};
use crate::assembly::{apply_dirichlet, assemble_system, basis_at, edge_jump_basis, ProblemData};
use crate::elements::{
    edge_map, ClementSpace, ElementMap, FeFunction, FeSpace, Family, ReferenceElement,
};
use crate::elements::{reference_edge_bubble, reference_element_bubble};
use crate::error::{Error, Result};
use crate::estimator::alignment_measure;
use crate::mesh::{
    aspect_ratio_mesh, build_graded_mesh, refine, split_to_triangles, DomainGeometry, Grading, Mesh,
    Point, Shape, Subdomain, Vector,
};
use crate::poly::Poly2;
use crate::quadrature::{line_rule, quadrature};
use crate::verification::{CaseKind, CaseParams};

/// Aspect ratios of the anisotropy sweeps.
pub const ASPECT_RATIOS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
/// Largest allowed spread of an empirical constant across the sweep.
pub const SWEEP_FACTOR: f64 = 10.0;
/// Lower bound demanded of the (I1) and (I3) ratios.
pub const LOWER_RATIO_MIN: f64 = 1e-2;
/// Lower bound demanded of the sampled coercivity ratio.
pub const COERCIVITY_MIN: f64 = 0.5;

pub const UNISOLVENCE_TOL: f64 = 1e-12;
pub const CR_TOL: f64 = 1e-12;
pub const CLEMENT_INCLUSION_TOL: f64 = 1e-10;
pub const ALIGNMENT_TOL: f64 = 1e-12;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.to_string(),
            passed: true,
            measured: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.measured.insert(key.into(), value);
    }

    /// Records `value` and fails the suite unless `ok`.
    fn check(&mut self, key: impl Into<String>, value: f64, ok: bool, bound: &str) {
        let key = key.into();
        if !ok || !value.is_finite() {
            self.passed = false;
            self.failures.push(format!("{key} = {value:e} violates {bound}"));
        }
        self.record(key, value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

impl PropertyReport {
    pub fn failures(&self) -> Vec<String> {
        self.suites
            .iter()
            .flat_map(|s| s.failures.iter().map(move |f| format!("{}: {f}", s.name)))
            .collect()
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

pub const SUITE_NAMES: [&str; 8] = [
    "unisolvence",
    "cr-property",
    "clement-inclusion",
    "inverse-inequalities",
    "clement-estimates",
    "coercivity",
    "alignment-bounds",
    "galerkin-orthogonality",
];

/// Runs every suite with RNG streams derived from `seed`.
pub fn property_suites(seed: u64) -> Result<PropertyReport> {
    let suites = vec![
        unisolvence_suite(),
        cr_property_suite()?,
        clement_inclusion_suite()?,
        inverse_inequality_suite(seed)?,
        clement_estimate_suite(seed.wrapping_add(1))?,
        coercivity_suite(seed.wrapping_add(2))?,
        alignment_suite(seed.wrapping_add(3))?,
        galerkin_orthogonality_suite()?,
    ];
    Ok(PropertyReport {
        seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

/// Runs one suite by name.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult> {
    match name {
        "unisolvence" => Ok(unisolvence_suite()),
        "cr-property" => cr_property_suite(),
        "clement-inclusion" => clement_inclusion_suite(),
        "inverse-inequalities" => inverse_inequality_suite(seed),
        "clement-estimates" => clement_estimate_suite(seed.wrapping_add(1)),
        "coercivity" => coercivity_suite(seed.wrapping_add(2)),
        "alignment-bounds" => alignment_suite(seed.wrapping_add(3)),
        "galerkin-orthogonality" => galerkin_orthogonality_suite(),
        other => Err(Error::InvalidData(format!("unknown property suite `{other}`"))),
    }
}

fn geometry() -> DomainGeometry {
    DomainGeometry {
        length: 1.0,
        half_height: 0.5,
    }
}

fn graded(shape: Shape) -> Result<Mesh> {
    let m = build_graded_mesh(geometry(), 3, 3, Grading::Geometric { ratio: 0.5 })?;
    match shape {
        Shape::Rectangle => Ok(m),
        Shape::Triangle => split_to_triangles(&m),
    }
}

fn sweep_mesh(shape: Shape, nx: usize, ar: f64) -> Result<Mesh> {
    let m = aspect_ratio_mesh(geometry(), nx, ar)?;
    match shape {
        Shape::Rectangle => Ok(m),
        Shape::Triangle => split_to_triangles(&m),
    }
}

fn shape_name(shape: Shape) -> &'static str {
    match shape {
        Shape::Triangle => "triangle",
        Shape::Rectangle => "rectangle",
    }
}

/// `max / min` of positive values.
fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

pub fn unisolvence_suite() -> SuiteResult {
    let mut s = SuiteResult::new("unisolvence");
    for &f in Family::ALL {
        let err = ReferenceElement::get(f).unisolvence_error();
        s.check(f.name(), err, err <= UNISOLVENCE_TOL, "1e-12");
    }
    s
}

/// `max_E |int_E [u_h]| / |E|` over all edges.
pub fn max_mean_jump(u_h: &FeFunction<'_>) -> Result<f64> {
    let mesh = u_h.space().mesh();
    let rule = line_rule(u_h.space().family().quadrature_degree())?;
    Ok((0..mesh.num_edges())
        .map(|e| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(&t, &w)| w * u_h.edge_jump(e, t))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max))
}

/// `max |int_E [phi]| / |E|` over every basis function and edge of `space`.
/// Boundary edges only see unconstrained basis functions.
pub fn max_basis_mean_jump(space: &FeSpace<'_>) -> Result<f64> {
    let mesh = space.mesh();
    let rule = line_rule(space.family().quadrature_degree())?;
    let mask = space.dirichlet_mask();
    let mut worst: f64 = 0.0;
    for e in 0..mesh.num_edges() {
        let mut means: HashMap<usize, f64> = HashMap::new();
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let (dofs, coef) = edge_jump_basis(space, e, t);
            for (g, c) in dofs.into_iter().zip(coef) {
                *means.entry(g).or_default() += w * c;
            }
        }
        let boundary = mesh.edge(e).is_boundary();
        for (g, m) in means {
            if !(boundary && mask[g]) {
                worst = worst.max(m.abs());
            }
        }
    }
    Ok(worst)
}

pub fn cr_property_suite() -> Result<SuiteResult> {
    let mut s = SuiteResult::new("cr-property");
    for f in [Family::Cr1, Family::Cr2, Family::Cr3] {
        let mesh = graded(f.shape())?;
        let space = FeSpace::new(&mesh, f)?;
        let v = max_basis_mean_jump(&space)?;
        s.check(f.name(), v, v <= CR_TOL, "1e-12");
    }
    Ok(s)
}

/// Largest pointwise difference between each Clement basis function and
/// its interpolant in `family`'s space.
pub fn clement_inclusion_error(mesh: &Mesh, family: Family) -> Result<f64> {
    let space = FeSpace::new(mesh, family)?;
    let cl = ClementSpace::new(mesh);
    let locator = mesh.locator();
    let rule = quadrature(mesh.shape(), 2 * family.degree() + 2)?;
    let mut worst: f64 = 0.0;
    for j in 0..cl.interior_nodes().len() {
        let nodal = cl.basis_function(j);
        let hat = |x: &Point| {
            locator
                .locate(x)
                .map(|k| cl.value_at(&nodal, k, x))
                .unwrap_or(f64::NAN)
        };
        let coef = space.interpolate(&hat, &|_| 0.0);
        let u = FeFunction::from_global(&space, &coef)?;
        for k in 0..mesh.num_elements() {
            let map = space.map(k);
            for p in &rule.points {
                let x = map.to_physical(*p);
                worst = worst.max((u.value_at(k, &x) - cl.value_at(&nodal, k, &x)).abs());
            }
        }
    }
    Ok(worst)
}

pub fn clement_inclusion_suite() -> Result<SuiteResult> {
    let mut s = SuiteResult::new("clement-inclusion");
    let tri = graded(Shape::Triangle)?;
    let rect = graded(Shape::Rectangle)?;
    for &f in Family::ALL {
        let mesh = if f.shape() == Shape::Triangle { &tri } else { &rect };
        let v = clement_inclusion_error(mesh, f)?;
        s.check(f.name(), v, v <= CLEMENT_INCLUSION_TOL, "1e-10");
    }
    Ok(s)
}

/// Extremes of the five bubble ratios on one element sweep entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseConstants {
    pub r1_min: f64,
    pub r1_max: f64,
    pub r2_max: f64,
    pub r3_min: f64,
    pub r3_max: f64,
    pub r4_max: f64,
    pub r5_max: f64,
}

fn random_poly(rng: &mut ChaCha8Rng) -> Poly2 {
    let terms: Vec<(f64, usize, usize)> = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        .iter()
        .map(|&(i, j)| (rng.random_range(-1.0..1.0), i, j))
        .collect();
    Poly2::from_terms(&terms)
}

fn random_edge_poly(rng: &mut ChaCha8Rng) -> Poly2 {
    let terms: Vec<(f64, usize, usize)> = (0..3).map(|i| (rng.random_range(-1.0..1.0), i, 0)).collect();
    Poly2::from_terms(&terms)
}

fn grad_norm2(p: &Poly2, jac_inv_t: &dyn Fn([f64; 2]) -> Vector, x: [f64; 2]) -> f64 {
    jac_inv_t([p.dx().eval(x[0], x[1]), p.dy().eval(x[0], x[1])]).norm_squared()
}

/// Ratios (I1)-(I5) over `samples` random quadratics on every upper-half
/// element of the single-column mesh of aspect ratio `ar`. The gradient
/// ratio (I2) uses `v b_K` since `grad b_K^(1/2)` is not square integrable.
pub fn inverse_constants(shape: Shape, ar: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<InverseConstants> {
    let geom = DomainGeometry::new(1.0, 1.0 / ar)?;
    let mut mesh = build_graded_mesh(geom, 1, 1, Grading::Uniform)?;
    if shape == Shape::Triangle {
        mesh = split_to_triangles(&mesh)?;
    }
    let rule = quadrature(shape, 14)?;
    let lrule = line_rule(12)?;
    let bk = reference_element_bubble(shape);
    let be = reference_edge_bubble(shape);
    let mut c = InverseConstants {
        r1_min: f64::MAX,
        r1_max: 0.0,
        r2_max: 0.0,
        r3_min: f64::MAX,
        r3_max: 0.0,
        r4_max: 0.0,
        r5_max: 0.0,
    };
    let family = if shape == Shape::Triangle { Family::P1 } else { Family::Q1 };
    for k in 0..mesh.num_elements() {
        let el = mesh.element(k);
        if el.subdomain != Subdomain::Upper {
            continue;
        }
        let map = ElementMap::new(&mesh, k, family);
        let h_min = el.anisotropy.h_min();
        for _ in 0..samples {
            let v = random_poly(rng);
            let vb = &v * &bk;
            let (mut n2, mut nb2, mut g2) = (0.0, 0.0, 0.0);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let val = v.eval(p[0], p[1]);
                n2 += w * map.det * val * val;
                nb2 += w * map.det * val * val * bk.eval(p[0], p[1]);
                g2 += w * map.det * grad_norm2(&vb, &|g| map.gradient(g), *p);
            }
            let r1 = (nb2 / n2).sqrt();
            c.r1_min = c.r1_min.min(r1);
            c.r1_max = c.r1_max.max(r1);
            c.r2_max = c.r2_max.max(g2.sqrt() * h_min / n2.sqrt());
        }
        for &e in &el.edges {
            let em = edge_map(&mesh, e, k)?;
            let len = mesh.edge(e).length;
            let h_ek = mesh.edge_height(e, k);
            for _ in 0..samples {
                let g = random_edge_poly(rng);
                let gb = &g * &be;
                let (mut e2, mut eb2) = (0.0, 0.0);
                for (&t, &w) in lrule.points.iter().zip(&lrule.weights) {
                    let val = g.eval(t, 0.0);
                    e2 += w * len * val * val;
                    eb2 += w * len * val * val * be.eval(t, 0.0);
                }
                let (mut k2, mut kg2) = (0.0, 0.0);
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    k2 += w * em.det * gb.eval(p[0], p[1]).powi(2);
                    kg2 += w * em.det * grad_norm2(&gb, &|d| em.gradient(d), *p);
                }
                let r3 = (eb2 / e2).sqrt();
                let scale = h_ek.sqrt() * e2.sqrt();
                c.r3_min = c.r3_min.min(r3);
                c.r3_max = c.r3_max.max(r3);
                c.r4_max = c.r4_max.max(k2.sqrt() / scale);
                c.r5_max = c.r5_max.max(kg2.sqrt() * h_min / scale);
            }
        }
    }
    Ok(c)
}

pub fn inverse_inequality_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("inverse-inequalities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for shape in [Shape::Rectangle, Shape::Triangle] {
        let name = shape_name(shape);
        let all: Vec<InverseConstants> = ASPECT_RATIOS
            .iter()
            .map(|&ar| inverse_constants(shape, ar, 100, &mut rng))
            .collect::<Result<_>>()?;
        for (c, ar) in all.iter().zip(ASPECT_RATIOS) {
            s.record(format!("{name}.ar{ar}.r2_max"), c.r2_max);
            s.record(format!("{name}.ar{ar}.r4_max"), c.r4_max);
            s.record(format!("{name}.ar{ar}.r5_max"), c.r5_max);
            s.check(format!("{name}.ar{ar}.r1_min"), c.r1_min, c.r1_min >= LOWER_RATIO_MIN, "lower bound");
            s.check(format!("{name}.ar{ar}.r3_min"), c.r3_min, c.r3_min >= LOWER_RATIO_MIN, "lower bound");
            let upper = c.r1_max.max(c.r3_max);
            s.check(format!("{name}.ar{ar}.r13_max"), upper, upper <= 1.0 + 1e-12, "<= 1");
        }
        let fields: [(&str, fn(&InverseConstants) -> f64); 5] = [
            ("r1_min", |c| c.r1_min),
            ("r2_max", |c| c.r2_max),
            ("r3_min", |c| c.r3_min),
            ("r4_max", |c| c.r4_max),
            ("r5_max", |c| c.r5_max),
        ];
        for (label, get) in fields {
            let v: Vec<f64> = all.iter().map(get).collect();
            let sp = spread(&v);
            s.check(format!("{name}.{label}.spread"), sp, sp <= SWEEP_FACTOR, "sweep factor 10");
        }
    }
    Ok(s)
}

/// Quadrature data of a fine mesh nested in a coarse one, enough to apply
/// the Clement operator of the coarse mesh to fine `P1`/`Q1` fields.
struct NestedSampler<'m> {
    coarse: &'m Mesh,
    fine: ClementSpace<'m>,
    coarse_space: ClementSpace<'m>,
    /// Per coarse element: `(fine element, reference point, weight * det)`.
    children: Vec<Vec<(usize, [f64; 2], f64)>>,
    /// Per coarse element, coarse basis values at the `children` points.
    coarse_values: Vec<Vec<Vec<f64>>>,
    /// Per coarse edge: `(element, coarse ref point, fine element, fine ref point, weight * len)`.
    edge_points: Vec<Vec<(usize, [f64; 2], usize, [f64; 2], f64)>>,
}

impl<'m> NestedSampler<'m> {
    fn new(coarse: &'m Mesh, fine_mesh: &'m Mesh) -> Result<Self> {
        let coarse_space = ClementSpace::new(coarse);
        let fine = ClementSpace::new(fine_mesh);
        let coarse_loc = coarse.locator();
        let fine_loc = fine_mesh.locator();
        let rule = quadrature(fine_mesh.shape(), 4)?;
        let mut children = vec![Vec::new(); coarse.num_elements()];
        for j in 0..fine_mesh.num_elements() {
            let parent = coarse_loc
                .locate(&fine_mesh.centroid(j))
                .ok_or_else(|| Error::InvalidMesh(format!("fine element {j} has no parent")))?;
            let map = fine.map(j);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                children[parent].push((j, *p, w * map.det));
            }
        }
        let coarse_values = children
            .iter()
            .enumerate()
            .map(|(k, pts)| {
                pts.iter()
                    .map(|(j, p, _)| {
                        let x = fine.map(*j).to_physical(*p);
                        let r = coarse_space.map(k).to_reference(&x);
                        element_values(&coarse_space, coarse, k, r)
                    })
                    .collect()
            })
            .collect();
        let lrule = line_rule(4)?;
        let pieces = 4;
        let mut edge_points = Vec::with_capacity(coarse.num_edges());
        for e in 0..coarse.num_edges() {
            let [a, b] = coarse.edge_points(e);
            let k = coarse.edge(e).minus;
            let len = coarse.edge(e).length;
            let mut pts = Vec::new();
            for piece in 0..pieces {
                for (&t, &w) in lrule.points.iter().zip(&lrule.weights) {
                    let s = (piece as f64 + t) / pieces as f64;
                    let x = a + (b - a) * s;
                    let j = fine_loc
                        .locate(&x)
                        .ok_or_else(|| Error::InvalidMesh("edge point outside fine mesh".into()))?;
                    pts.push((
                        k,
                        coarse_space.map(k).to_reference(&x),
                        j,
                        fine.map(j).to_reference(&x),
                        w * len / pieces as f64,
                    ));
                }
            }
            edge_points.push(pts);
        }
        Ok(NestedSampler {
            coarse,
            fine,
            coarse_space,
            children,
            coarse_values,
            edge_points,
        })
    }

    /// `(cle1 LHS, cle2 LHS, m_1^2 |grad v|^2)` for the fine nodal field `v`.
    fn evaluate(&self, v: &[f64]) -> (f64, f64, f64) {
        let mesh = self.coarse;
        let integrals: Vec<f64> = self
            .children
            .iter()
            .map(|pts| pts.iter().map(|(j, p, w)| w * self.fine.value(v, *j, *p)).sum())
            .collect();
        let mut coef = vec![0.0; mesh.num_vertices()];
        for &x in self.coarse_space.interior_nodes() {
            let patch = mesh.vertex_patch(x);
            let num: f64 = patch.iter().map(|&k| integrals[k]).sum();
            let den: f64 = patch.iter().map(|&k| mesh.element(k).area).sum();
            coef[x] = num / den;
        }
        let (mut lhs1, mut rhs) = (0.0, 0.0);
        for k in 0..mesh.num_elements() {
            let el = mesh.element(k);
            let hmin2 = el.anisotropy.h_min().powi(2);
            let ct = el.anisotropy.c_matrix().transpose();
            let verts = &el.vertices;
            for ((j, p, w), cv) in self.children[k].iter().zip(&self.coarse_values[k]) {
                let iv: f64 = verts.iter().zip(cv).map(|(&n, b)| coef[n] * b).sum();
                let d = self.fine.value(v, *j, *p) - iv;
                lhs1 += w * d * d / hmin2;
                let g = self.fine.gradient(v, *j, *p);
                rhs += w * (ct * g).norm_squared() / hmin2;
            }
        }
        let mut lhs2 = 0.0;
        for (e, pts) in self.edge_points.iter().enumerate() {
            let edge = mesh.edge(e);
            let weight = edge.h_e / (edge.h_min_e * edge.h_min_e);
            for (k, rc, j, rf, w) in pts {
                let d = self.fine.value(v, *j, *rf) - self.coarse_space.value(&coef, *k, *rc);
                lhs2 += weight * w * d * d;
            }
        }
        (lhs1, lhs2, rhs)
    }
}

fn element_values(space: &ClementSpace<'_>, mesh: &Mesh, k: usize, r: [f64; 2]) -> Vec<f64> {
    let n = mesh.element(k).vertices.len();
    (0..n)
        .map(|i| {
            let mut unit = vec![0.0; mesh.num_vertices()];
            unit[mesh.element(k).vertices[i]] = 1.0;
            space.value(&unit, k, r)
        })
        .collect()
}

/// Random fine field: i.i.d. nodal values for even `i`, a random smooth
/// sine series for odd `i`. Zero on the boundary either way.
fn random_field(mesh: &Mesh, i: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let g = mesh.geometry();
    if i % 2 == 0 {
        (0..mesh.num_vertices())
            .map(|v| {
                let r = rng.random_range(-1.0..1.0);
                if mesh.is_boundary_vertex(v) {
                    0.0
                } else {
                    r
                }
            })
            .collect()
    } else {
        let c: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        mesh.vertices()
            .iter()
            .map(|p| {
                let mut s = 0.0;
                for m in 1..=3 {
                    for n in 1..=3 {
                        s += c[(m - 1) * 3 + n - 1]
                            * (m as f64 * PI * p.x / g.length).sin()
                            * (n as f64 * PI * (p.y + g.half_height) / (2.0 * g.half_height)).sin();
                    }
                }
                s
            })
            .collect()
    }
}

/// Largest `(cle1, cle2)` ratios over `fields` random fields on the mesh
/// pair `aspect_ratio_mesh(nx = 4, ar)` and its second uniform refinement.
pub fn clement_ratios(shape: Shape, ar: f64, fields: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let coarse_rect = aspect_ratio_mesh(geometry(), 4, ar)?;
    let once = refine(&coarse_rect, &(0..coarse_rect.num_elements()).collect::<Vec<_>>())?;
    let fine_rect = refine(&once, &(0..once.num_elements()).collect::<Vec<_>>())?;
    let (coarse, fine) = match shape {
        Shape::Rectangle => (coarse_rect, fine_rect),
        Shape::Triangle => (split_to_triangles(&coarse_rect)?, split_to_triangles(&fine_rect)?),
    };
    let sampler = NestedSampler::new(&coarse, &fine)?;
    let vs: Vec<Vec<f64>> = (0..fields).map(|i| random_field(&fine, i, rng)).collect();
    let out: Vec<(f64, f64)> = vs
        .par_iter()
        .map(|v| {
            let (l1, l2, r) = sampler.evaluate(v);
            (l1 / r, l2 / r)
        })
        .collect();
    Ok(out.iter().fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y))))
}

pub fn clement_estimate_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("clement-estimates");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for shape in [Shape::Rectangle, Shape::Triangle] {
        let name = shape_name(shape);
        let mut c1 = Vec::new();
        let mut c2 = Vec::new();
        for ar in ASPECT_RATIOS {
            let (a, b) = clement_ratios(shape, ar, 50, &mut rng)?;
            s.record(format!("{name}.ar{ar}.cle1"), a);
            s.record(format!("{name}.ar{ar}.cle2"), b);
            c1.push(a);
            c2.push(b);
        }
        // bounded above relative to the isotropic mesh
        let g1 = c1.iter().copied().fold(0.0, f64::max) / c1[0];
        let g2 = c2.iter().copied().fold(0.0, f64::max) / c2[0];
        s.check(format!("{name}.cle1.growth"), g1, g1 <= SWEEP_FACTOR, "sweep factor 10");
        s.check(format!("{name}.cle2.growth"), g2, g2 <= SWEEP_FACTOR, "sweep factor 10");
    }
    Ok(s)
}

/// Smallest `v^T A v / |v|_h^2` over `samples` random free vectors.
pub fn coercivity_ratio(mesh: &Mesh, family: Family, samples: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let space = FeSpace::new(mesh, family)?;
    let data = ProblemData::homogeneous(1.0, 1.0, 1.0)?;
    let system = assemble_system(&space, &data, !family.is_conforming())?;
    let reduced = apply_dirichlet(&system);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x: Vec<f64> = (0..reduced.matrix.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let energy = reduced.matrix.quadratic_form(&x);
        let u = FeFunction::from_global(&space, &reduced.extend(&x))?;
        let norm2 = ErrorDistribution::compute(&u, None)?.global(NormKind::Discrete).powi(2);
        worst = worst.min(energy / norm2);
    }
    Ok(worst)
}

pub fn coercivity_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("coercivity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for f in [Family::P1, Family::P2, Family::Q1, Family::Q2, Family::Cr1, Family::Cr2, Family::Cr3] {
        for ar in ASPECT_RATIOS {
            let mesh = sweep_mesh(f.shape(), 4, ar)?;
            let c = coercivity_ratio(&mesh, f, 50, &mut rng)?;
            s.check(format!("{}.ar{ar}", f.name()), c, c >= COERCIVITY_MIN, ">= 0.5");
        }
    }
    Ok(s)
}

fn constant_gradient_m1(mesh: &Mesh, g: Vector) -> Result<f64> {
    alignment_measure(mesh, &|_, _| g, 2)
}

pub fn alignment_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("alignment-bounds");
    let thin = build_graded_mesh(DomainGeometry::new(1.0, 0.1)?, 1, 1, Grading::Uniform)?;
    let m = constant_gradient_m1(&thin, Vector::new(0.0, 1.0))?;
    s.check("aligned", m, (m - 1.0).abs() <= ALIGNMENT_TOL, "m1 = 1");
    let m = constant_gradient_m1(&thin, Vector::new(1.0, 0.0))?;
    s.check("misaligned", m, (m - 10.0).abs() <= ALIGNMENT_TOL, "m1 = aspect ratio");
    let squares = build_graded_mesh(geometry(), 4, 2, Grading::Uniform)?;
    let m = constant_gradient_m1(&squares, Vector::new(0.3, -1.2))?;
    s.check("isotropic", m, (m - 1.0).abs() <= ALIGNMENT_TOL, "m1 = 1");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi_margin) = (f64::INFINITY, f64::NEG_INFINITY);
    for ar in ASPECT_RATIOS {
        let mesh = sweep_mesh(Shape::Triangle, 4, ar)?;
        let max_ar = mesh.elements().iter().map(|e| e.anisotropy.aspect_ratio()).fold(1.0, f64::max);
        let cl = ClementSpace::new(&mesh);
        for i in 0..50 {
            let v = random_field(&mesh, i, &mut rng);
            let grad = |k: usize, x: &Point| cl.gradient(&v, k, cl.map(k).to_reference(x));
            let m = alignment_measure(&mesh, &grad, 2)?;
            lo = lo.min(m);
            hi_margin = hi_margin.max(m - max_ar);
        }
    }
    s.check("random.min", lo, lo >= 1.0 - 1e-12, ">= 1");
    s.check("random.max_minus_aspect_ratio", hi_margin, hi_margin <= 1e-10, "<= max aspect ratio");
    Ok(s)
}

/// `max_i |a(u - u_h, phi_i)| / max_i |F(phi_i)|` over free basis functions,
/// for the layered case solved in a conforming `family`.
pub fn galerkin_orthogonality(mesh: &Mesh, family: Family) -> Result<f64> {
    let case = ManufacturedCase::new(CaseKind::LayeredCoupled, *mesh.geometry(), CaseParams::default())?;
    let data = case.data();
    let space = FeSpace::new(mesh, family)?;
    let system = assemble_system(&space, &data, false)?;
    let reduced = apply_dirichlet(&system);
    let (x, _) = crate::solver::solve(&reduced.matrix, &reduced.rhs, &crate::solver::SolverConfig::dense())?;
    let full = reduced.extend(&x);
    let n = space.num_dofs();
    // a(u, phi_i) by high order quadrature
    let deg = family.quadrature_degree() + 8;
    let mut au = vec![0.0; n];
    for k in 0..mesh.num_elements() {
        let map = space.map(k);
        let sub = mesh.element(k).subdomain;
        let rule = quadrature(mesh.element(k).shape, deg)?;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let xp = map.to_physical(*p);
            let gu = (case.grad_matrix)(&xp, sub);
            for (&g, grad) in space.element_dofs(k).iter().zip(space.reference().gradients_at(*p)) {
                au[g] += w * map.det * data.conductivity * gu.dot(&map.gradient(grad));
            }
        }
    }
    let lrule = line_rule(deg)?;
    let off = space.conduit_offset();
    for (i, &e) in mesh.conduit_edges().iter().enumerate() {
        let (x0, x1) = space.conduit_edge_span(i);
        let len = x1 - x0;
        let k = mesh.edge(e).minus;
        for (&t, &w) in lrule.points.iter().zip(&lrule.weights) {
            let xs = x0 + t * len;
            let xp = Point::new(xs, 0.0);
            let (uc, duc) = ((case.u_conduit)(xs), (case.du_conduit)(xs));
            let exch = data.exchange * ((case.u_matrix)(&xp) - uc);
            let cv = space.conduit_values(t);
            let cd = space.conduit_derivatives(t);
            for ((&g, v), d) in space.conduit_edge_dofs(i).iter().zip(cv).zip(cd) {
                au[off + g] += w * len * (data.conduit_conductivity * duc * d / len - exch * v);
            }
            for (&g, v) in space.element_dofs(k).iter().zip(basis_at(&space, k, &xp)) {
                au[g] += w * len * exch * v;
            }
        }
    }
    let ax = system.matrix.matvec(&full);
    let mask = space.dirichlet_mask();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in (0..n).filter(|&i| !mask[i]) {
        // a(u, phi) - a(u_h, phi) = (a(u, phi) - F(phi)) + (F(phi) - (A x)_i)
        worst = worst.max((au[i] - ax[i]).abs());
        scale = scale.max(system.rhs[i].abs());
    }
    Ok(worst / scale)
}

pub fn galerkin_orthogonality_suite() -> Result<SuiteResult> {
    let mut s = SuiteResult::new("galerkin-orthogonality");
    for f in [Family::P1, Family::P2, Family::Q1, Family::Q2] {
        let mesh = graded(f.shape())?;
        let v = galerkin_orthogonality(&mesh, f)?;
        s.check(f.name(), v, v <= ORTHOGONALITY_TOL, "1e-8");
    }
    Ok(s)
}
