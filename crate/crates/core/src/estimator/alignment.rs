use rayon::prelude::*;

use super::projection_map;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Vector};
use crate::quadrature::quadrature;

/// `m_1(v) = (sum_K h_min,K^-2 |C_K^T grad v|_K^2)^(1/2) / |grad v|`.
///
/// `grad` is evaluated per element so piecewise fields (finite element
/// errors) are handled; `degree` is the quadrature degree per element.
pub fn alignment_measure(
    mesh: &Mesh,
    grad: &(dyn Fn(usize, &Point) -> Vector + Sync),
    degree: usize,
) -> Result<f64> {
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let el = mesh.element(k);
            let rule = quadrature(el.shape, degree)?;
            let map = projection_map(mesh, k);
            let ct = el.anisotropy.c_matrix().transpose();
            let hmin2 = el.anisotropy.h_min().powi(2);
            let (mut num, mut den) = (0.0, 0.0);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let g = grad(k, &map.to_physical(*p));
                num += w * map.det * (ct * g).norm_squared() / hmin2;
                den += w * map.det * g.norm_squared();
            }
            Ok((num, den))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (num, den) = parts
        .iter()
        .fold((0.0, 0.0), |(a, b), (n, d)| (a + n, b + d));
    if !(num.is_finite() && den.is_finite()) {
        return Err(Error::NonFinite("alignment measure".into()));
    }
    if den == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok((num / den).sqrt())
}
