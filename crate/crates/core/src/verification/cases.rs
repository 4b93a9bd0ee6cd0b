use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::ProblemData;
use crate::error::{Error, Result};
use crate::mesh::{DomainGeometry, Point, Subdomain, Vector};

type Scalar2 = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type Gradient2 = Arc<dyn Fn(&Point, Subdomain) -> Vector + Send + Sync>;
type Scalar1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    /// `sin(pi x / L) cos(pi y / 2H)`; smooth across the conduit.
    SmoothDecoupled,
    /// `sin(pi x / L) (H - |y|)(a + b |y|)`; kinked at `y = 0`.
    LayeredCoupled,
    /// `u^m = 0`, `u^c = x (L - x)`, no exchange.
    ConduitQuadratic,
    /// Everything zero.
    Zero,
}

/// Coefficients shared by all manufactured cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaseParams {
    pub conductivity: f64,
    pub conduit_conductivity: f64,
    pub exchange: f64,
    /// Layer constant `a`; `None` selects `1 / H`.
    pub a: Option<f64>,
}

impl Default for CaseParams {
    fn default() -> Self {
        CaseParams {
            conductivity: 1.0,
            conduit_conductivity: 1.0,
            exchange: 1.0,
            a: None,
        }
    }
}

/// Exact solution with matching sources.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub geometry: DomainGeometry,
    pub params: CaseParams,
    /// Layer constants `(a, b)` of the layered case.
    pub layer: Option<(f64, f64)>,
    pub u_matrix: Scalar2,
    /// Gradient of `u^m`; the subdomain picks the one-sided limit on `y = 0`.
    pub grad_matrix: Gradient2,
    pub u_conduit: Scalar1,
    pub du_conduit: Scalar1,
    pub f_matrix: Scalar2,
    pub f_conduit: Scalar1,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("kind", &self.kind)
            .field("geometry", &self.geometry)
            .field("params", &self.params)
            .field("layer", &self.layer)
            .finish_non_exhaustive()
    }
}

fn validate(p: &CaseParams) -> Result<()> {
    if !(p.conductivity > 0.0 && p.conduit_conductivity > 0.0 && p.exchange >= 0.0) {
        return Err(Error::InvalidData(format!(
            "need conductivity > 0, conduit conductivity > 0, exchange >= 0; got {}, {}, {}",
            p.conductivity, p.conduit_conductivity, p.exchange
        )));
    }
    Ok(())
}

impl ManufacturedCase {
    pub fn new(kind: CaseKind, geometry: DomainGeometry, params: CaseParams) -> Result<Self> {
        match kind {
            CaseKind::SmoothDecoupled => smooth_case(geometry, params),
            CaseKind::LayeredCoupled => make_layered_case(geometry, params),
            CaseKind::ConduitQuadratic => conduit_quadratic_case(geometry, params),
            CaseKind::Zero => zero_case(geometry, params),
        }
    }

    pub fn data(&self) -> ProblemData {
        ProblemData {
            conductivity: self.params.conductivity,
            conduit_conductivity: self.params.conduit_conductivity,
            exchange: self.params.exchange,
            f_matrix: self.f_matrix.clone(),
            f_conduit: self.f_conduit.clone(),
        }
    }

    /// `K (d_y u^+ - d_y u^-) - alpha (u^m - u^c)` at `(x, 0)`.
    pub fn interface_residual(&self, x: f64) -> f64 {
        let p = Point::new(x, 0.0);
        let jump = (self.grad_matrix)(&p, Subdomain::Upper).y - (self.grad_matrix)(&p, Subdomain::Lower).y;
        self.params.conductivity * jump - self.params.exchange * ((self.u_matrix)(&p) - (self.u_conduit)(x))
    }
}

/// Smooth case; the exchange term vanishes because the traces agree.
fn smooth_case(geom: DomainGeometry, params: CaseParams) -> Result<ManufacturedCase> {
    validate(&params)?;
    let (l, h) = (geom.length, geom.half_height);
    let (kx, ky) = (PI / l, PI / (2.0 * h));
    let (kc, dc) = (params.conductivity, params.conduit_conductivity);
    Ok(ManufacturedCase {
        kind: CaseKind::SmoothDecoupled,
        geometry: geom,
        params,
        layer: None,
        u_matrix: Arc::new(move |p| (kx * p.x).sin() * (ky * p.y).cos()),
        grad_matrix: Arc::new(move |p, _| {
            Vector::new(
                kx * (kx * p.x).cos() * (ky * p.y).cos(),
                -ky * (kx * p.x).sin() * (ky * p.y).sin(),
            )
        }),
        u_conduit: Arc::new(move |x| (kx * x).sin()),
        du_conduit: Arc::new(move |x| kx * (kx * x).cos()),
        f_matrix: Arc::new(move |p| kc * (kx * kx + ky * ky) * (kx * p.x).sin() * (ky * p.y).cos()),
        f_conduit: Arc::new(move |x| dc * kx * kx * (kx * x).sin()),
    })
}

/// Layered case `u^m = sin(pi x / L) phi(|y|)` with
/// `phi(t) = (H - t)(a + b t)` and `u^c = sin(pi x / L)`. The constant `b`
/// enforces the interface condition `2 K (b H - a) = alpha (a H - 1)`.
pub fn make_layered_case(geom: DomainGeometry, params: CaseParams) -> Result<ManufacturedCase> {
    validate(&params)?;
    let (l, h) = (geom.length, geom.half_height);
    let a = params.a.unwrap_or(1.0 / h);
    let (kc, dc, alpha) = (params.conductivity, params.conduit_conductivity, params.exchange);
    let b = (alpha * (a * h - 1.0) / kc + 2.0 * a) / (2.0 * h);
    if !b.is_finite() {
        return Err(Error::InvalidData("layer constant b is unbounded".into()));
    }
    let kx = PI / l;
    let phi = move |t: f64| (h - t) * (a + b * t);
    let dphi = move |t: f64| b * h - a - 2.0 * b * t;
    Ok(ManufacturedCase {
        kind: CaseKind::LayeredCoupled,
        geometry: geom,
        params,
        layer: Some((a, b)),
        u_matrix: Arc::new(move |p| (kx * p.x).sin() * phi(p.y.abs())),
        grad_matrix: Arc::new(move |p, side| {
            let sign = match side {
                Subdomain::Upper => 1.0,
                Subdomain::Lower => -1.0,
            };
            Vector::new(
                kx * (kx * p.x).cos() * phi(p.y.abs()),
                sign * (kx * p.x).sin() * dphi(p.y.abs()),
            )
        }),
        u_conduit: Arc::new(move |x| (kx * x).sin()),
        du_conduit: Arc::new(move |x| kx * (kx * x).cos()),
        f_matrix: Arc::new(move |p| kc * (kx * p.x).sin() * (kx * kx * phi(p.y.abs()) + 2.0 * b)),
        f_conduit: Arc::new(move |x| (dc * kx * kx - alpha * (a * h - 1.0)) * (kx * x).sin()),
    })
}

fn conduit_quadratic_case(geom: DomainGeometry, mut params: CaseParams) -> Result<ManufacturedCase> {
    params.exchange = 0.0;
    validate(&params)?;
    let l = geom.length;
    let dc = params.conduit_conductivity;
    Ok(ManufacturedCase {
        kind: CaseKind::ConduitQuadratic,
        geometry: geom,
        params,
        layer: None,
        u_matrix: Arc::new(|_| 0.0),
        grad_matrix: Arc::new(|_, _| Vector::zeros()),
        u_conduit: Arc::new(move |x| x * (l - x)),
        du_conduit: Arc::new(move |x| l - 2.0 * x),
        f_matrix: Arc::new(|_| 0.0),
        f_conduit: Arc::new(move |_| 2.0 * dc),
    })
}

fn zero_case(geom: DomainGeometry, params: CaseParams) -> Result<ManufacturedCase> {
    validate(&params)?;
    Ok(ManufacturedCase {
        kind: CaseKind::Zero,
        geometry: geom,
        params,
        layer: None,
        u_matrix: Arc::new(|_| 0.0),
        grad_matrix: Arc::new(|_, _| Vector::zeros()),
        u_conduit: Arc::new(|_| 0.0),
        du_conduit: Arc::new(|_| 0.0),
        f_matrix: Arc::new(|_| 0.0),
        f_conduit: Arc::new(|_| 0.0),
    })
}
