use nalgebra::Vector3;
use rayon::prelude::*;

use crate::dgcore::{DGSpace, QuadratureRule};
use crate::geometry::{exact_jet, ExactSurface, MetricSample};

/// Broken norms of the difference between a discrete and an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolutionErrors {
    pub l2: f64,
    pub h1_semi: f64,
    /// `(sum_e beta/h int_e [u_h]^2)^(1/2)` over interior parametric edges.
    pub jump: f64,
}

/// Exact solution data: value and ambient gradient at surface points.
pub trait ExactField: Sync {
    fn value(&self, x: &Vector3<f64>) -> f64;
    fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64>;
}

/// Errors of `coeffs` against `u` lifted to the exact surface.
///
/// Both functions are compared at the same parametric point: the discrete one
/// through its patch, the exact one at the closest point of the flat point.
/// Integrals use the exact area element; the discrete surface gradient is
/// pushed forward with the exact Jacobian.
pub fn solution_errors(
    space: &DGSpace,
    coeffs: &[f64],
    u: &dyn ExactField,
    surface: &ExactSurface,
    beta: f64,
    quad_boost: usize,
) -> SolutionErrors {
    let rule = QuadratureRule::for_degrees(space.k(), space.l(), quad_boost);
    let (l2, h1) = (0..space.patches().len())
        .into_par_iter()
        .map(|t| {
            let p = &space.patches()[t];
            let det = p.reference_jacobian_det();
            let mut l2 = 0.0;
            let mut h1 = 0.0;
            for (xi, w) in rule.triangle.points.iter().zip(&rule.triangle.weights) {
                let s = p.reference_to_parametric(xi);
                let (x, je) = exact_jet(surface, p.frame(), &s);
                let me = match MetricSample::from_jacobian(je) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                let (uh, gh) = space.evaluate_with_gradient(coeffs, t, xi);
                let surf_grad_h = je * (me.g_inv() * gh);
                let grad_exact = surface.tangential(&x, &u.gradient(&x));
                let ww = w * det * me.sqrt_det_g;
                l2 += ww * (uh - u.value(&x)).powi(2);
                h1 += ww * (surf_grad_h - grad_exact).norm_squared();
            }
            (l2, h1)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    SolutionErrors {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        jump: jump_norm(space, coeffs, beta, &rule),
    }
}

fn jump_norm(space: &DGSpace, coeffs: &[f64], beta: f64, rule: &QuadratureRule) -> f64 {
    let mesh = space.mesh();
    let h = mesh.h();
    let sum: f64 = (0..mesh.edges().len())
        .into_par_iter()
        .map(|e| {
            let Ok(Some([p, m])) = space.edge_sides(e) else {
                return 0.0;
            };
            let [a, b] = mesh.edges()[e].vertices;
            let len = (mesh.vertices()[b] - mesh.vertices()[a]).norm();
            rule.edge
                .points
                .iter()
                .zip(&rule.edge.weights)
                .map(|(t, w)| {
                    let up = space.evaluate(coeffs, p.triangle, &p.reference_point(*t));
                    let um = space.evaluate(coeffs, m.triangle, &m.reference_point(*t));
                    w * len * (up - um).powi(2)
                })
                .sum::<f64>()
        })
        .sum();
    (beta / h * sum).sqrt()
}

/// A closure pair as an [`ExactField`].
pub struct FnField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ExactField for FnField<V, G>
where
    V: Fn(&Vector3<f64>) -> f64 + Sync,
    G: Fn(&Vector3<f64>) -> Vector3<f64> + Sync,
{
    fn value(&self, x: &Vector3<f64>) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        (self.gradient)(x)
    }
}

/// Linear function `a . x`.
pub struct LinearField(pub Vector3<f64>);

impl ExactField for LinearField {
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.0.dot(x)
    }

    fn gradient(&self, _x: &Vector3<f64>) -> Vector3<f64> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exact_patches;
    use crate::meshgen::flat_square_mesh;

    #[test]
    fn flat_interpolant_of_polynomial_is_exact() {
        let mesh = flat_square_mesh(3, 1.0);
        let patches = exact_patches(&mesh, &ExactSurface::PlaneZ0, 1).unwrap();
        let space = DGSpace::new(mesh, patches, 2).unwrap();
        let u = FnField {
            value: |x: &Vector3<f64>| x.x * x.y - 0.5 * x.y * x.y + x.x,
            gradient: |x: &Vector3<f64>| Vector3::new(x.y + 1.0, x.x - x.y, 0.0),
        };
        let c = space.interpolate(|x| u.value(x));
        let e = solution_errors(&space, &c, &u, &ExactSurface::PlaneZ0, 10.0, 0);
        assert!(e.l2 <= 1e-12 && e.h1_semi <= 1e-12 && e.jump <= 1e-12, "{e:?}");
    }
}
