use nalgebra::{Matrix2, Vector2, Vector3};

use super::poly::FittedPolynomial;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 50;
const SINGULAR_DET: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Closest point on the graph, in frame coordinates `(s1, s2, p(s1, s2))`.
    pub psi: Vector3<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Stationarity residual of `|(s, p(s)) - (x, 0)|^2 / 2` with respect to `s`.
pub fn residual(poly: &FittedPolynomial, x: &Vector2<f64>, s: &Vector2<f64>) -> Vector2<f64> {
    let (p, g, _) = poly.jet(s);
    g * p + s - x
}

/// Closest point on the graph of `poly` to the in-plane point `x` (zero normal coordinate).
///
/// Starts from `s = x` and applies Newton's method to the first-order
/// optimality condition `p(s) grad p(s) + s - x = 0`.
pub fn newton_project(poly: &FittedPolynomial, x: &Vector2<f64>, tol: f64, max_iter: usize) -> Result<Projection> {
    let mut s = *x;
    let mut iterations = 0;
    loop {
        let (p, g, h) = poly.jet(&s);
        let m = g * p + s - x;
        let res = m.norm();
        if res <= tol {
            return Ok(Projection {
                psi: Vector3::new(s.x, s.y, p),
                residual: res,
                iterations,
            });
        }
        if !res.is_finite() || iterations >= max_iter {
            return Err(Error::NewtonDiverged {
                residual: res,
                iterations,
            });
        }
        let jac = Matrix2::identity() + g * g.transpose() + h * p;
        let det = jac.determinant();
        if det.abs() < SINGULAR_DET {
            return Err(Error::NewtonDiverged {
                residual: res,
                iterations,
            });
        }
        let inv = Matrix2::new(jac.m22, -jac.m12, -jac.m21, jac.m11) / det;
        s -= inv * m;
        iterations += 1;
    }
}
