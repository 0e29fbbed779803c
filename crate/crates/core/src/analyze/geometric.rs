use nalgebra::{Matrix3x2, Vector2};
use rayon::prelude::*;

use crate::dgcore::TriangleRule;
use crate::geometry::{exact_jet, ExactSurface, PatchMap};

/// Maximum nodal distance to the exact surface and its in-plane part.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GeoErrorReport {
    /// `max |psi - xi|` over all reconstructed nodes, `xi` the exact closest point.
    pub e_n: f64,
    /// Same maximum for the component of `psi - xi` in the owning triangle's plane.
    pub e_t: f64,
}

pub fn geometric_errors(patches: &[PatchMap], surface: &ExactSurface) -> GeoErrorReport {
    let (e_n, e_t) = patches
        .par_iter()
        .map(|p| {
            let f = p.frame();
            p.nodes().iter().fold((0.0f64, 0.0f64), |(en, et), psi| {
                let d = psi - surface.closest_point(psi);
                let tangential = Vector2::new(d.dot(&f.tangent1), d.dot(&f.tangent2)).norm();
                (en.max(d.norm()), et.max(tangential))
            })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    GeoErrorReport { e_n, e_t }
}

/// Largest Jacobian and metric-tensor discrepancies against the exact map.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MetricErrorReport {
    /// `max |J - J_h|` (Frobenius) over sample points.
    pub jacobian: f64,
    /// `max |g - g_h|` (Frobenius) over sample points.
    pub metric: f64,
}

/// Compare patch Jacobians and metrics with reference patches over the same
/// parametric triangles (typically the exact-surface patches of equal
/// degree) at the points of a triangle rule of the given degree.
pub fn metric_errors(patches: &[PatchMap], reference: &[PatchMap], rule_degree: usize) -> MetricErrorReport {
    assert_eq!(patches.len(), reference.len());
    sample_max(patches, rule_degree, |t, xi| reference[t].jet_at_reference(xi).1)
}

/// As [`metric_errors`], against the continuous closest-point map of the flat triangle.
pub fn metric_errors_continuous(patches: &[PatchMap], surface: &ExactSurface, rule_degree: usize) -> MetricErrorReport {
    sample_max(patches, rule_degree, |t, xi| {
        let p = &patches[t];
        exact_jet(surface, p.frame(), &p.reference_to_parametric(xi)).1
    })
}

fn sample_max<F>(patches: &[PatchMap], rule_degree: usize, reference: F) -> MetricErrorReport
where
    F: Fn(usize, &Vector2<f64>) -> Matrix3x2<f64> + Sync,
{
    let rule = TriangleRule::with_degree(rule_degree);
    let (j, g) = patches
        .par_iter()
        .enumerate()
        .map(|(t, p)| {
            rule.points.iter().fold((0.0f64, 0.0f64), |(ej, eg), xi| {
                let (_, jh) = p.jet_at_reference(xi);
                let je = reference(t, xi);
                let gh = jh.transpose() * jh;
                let ge = je.transpose() * je;
                (ej.max((jh - je).norm()), eg.max((gh - ge).norm()))
            })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    MetricErrorReport { jacobian: j, metric: g }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exact_patches;
    use crate::meshgen::flat_square_mesh;

    #[test]
    fn flat_surface_has_no_error() {
        let mesh = flat_square_mesh(3, 1.0);
        for k in 1..=3 {
            let p = exact_patches(&mesh, &ExactSurface::PlaneZ0, k).unwrap();
            let r = geometric_errors(&p, &ExactSurface::PlaneZ0);
            assert!(r.e_n <= 1e-12 && r.e_t <= 1e-12);
            let m = metric_errors_continuous(&p, &ExactSurface::PlaneZ0, 4);
            assert!(m.jacobian <= 1e-12 && m.metric <= 1e-12);
            let m = metric_errors(&p, &p, 4);
            assert!(m.jacobian == 0.0 && m.metric == 0.0);
        }
    }
}
