use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3x2, Vector2, Vector3};
use rayon::prelude::*;

use super::exact::ExactSurface;
use super::frame::{build_local_frame, LocalFrame};
use super::lagrange::LagrangeBasis;
use super::newton::{newton_project, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::poly::{fit_patch_polynomial, FitOptions, FittedPolynomial};
use crate::error::{Error, Result};
use crate::meshgen::{PointCloud, ReferenceMesh};

/// Degree-`k` curved patch over one flat triangle.
///
/// Points of the parametric triangle are addressed either in frame
/// coordinates `s` or in reference coordinates `xi` with
/// `s = a + B xi`, where `a` is the first vertex and `B` holds the two edge
/// vectors leaving it. Jacobians and metrics are always taken with respect to `s`.
#[derive(Debug, Clone)]
pub struct PatchMap {
    degree: usize,
    nodes: Vec<Vector3<f64>>,
    frame: LocalFrame,
    parametric_triangle: [Vector2<f64>; 3],
    basis: Arc<LagrangeBasis>,
    b: Matrix2<f64>,
    b_inv: Matrix2<f64>,
}

/// Jacobian, metric tensor and area element at one parametric point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub jacobian: Matrix3x2<f64>,
    pub g: Matrix2<f64>,
    pub sqrt_det_g: f64,
}

impl MetricSample {
    pub fn from_jacobian(jacobian: Matrix3x2<f64>) -> Result<Self> {
        let g = jacobian.transpose() * jacobian;
        let det = g.m11 * g.m22 - g.m12 * g.m21;
        if !(det > 0.0) {
            return Err(Error::SingularMetric { det });
        }
        Ok(Self {
            jacobian,
            g,
            sqrt_det_g: det.sqrt(),
        })
    }

    pub fn g_inv(&self) -> Matrix2<f64> {
        let det = self.sqrt_det_g * self.sqrt_det_g;
        Matrix2::new(self.g.m22, -self.g.m12, -self.g.m21, self.g.m11) / det
    }
}

/// Edge stretch factor and pulled-back unit conormal at one edge point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSample {
    pub l_g: f64,
    /// `e_n` with `e_n^T g e_n = 1`, `g`-orthogonal to the edge, pointing outward.
    pub conormal: Vector2<f64>,
    /// Parametric point on the edge.
    pub point: Vector2<f64>,
    pub metric: MetricSample,
}

impl PatchMap {
    /// Patch interpolating `nodes` (global coordinates, principal-lattice order).
    pub fn from_nodes(
        frame: LocalFrame,
        parametric_triangle: [Vector2<f64>; 3],
        basis: Arc<LagrangeBasis>,
        nodes: Vec<Vector3<f64>>,
    ) -> Self {
        assert_eq!(nodes.len(), basis.len());
        let [a, b1, b2] = parametric_triangle;
        let b = Matrix2::from_columns(&[b1 - a, b2 - a]);
        let b_inv = b.try_inverse().expect("parametric triangle is non-degenerate");
        Self {
            degree: basis.degree(),
            nodes,
            frame,
            parametric_triangle,
            basis,
            b,
            b_inv,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn frame(&self) -> &LocalFrame {
        &self.frame
    }

    pub fn parametric_triangle(&self) -> &[Vector2<f64>; 3] {
        &self.parametric_triangle
    }

    /// Lagrange nodes in parametric coordinates, matching `nodes()`.
    pub fn parametric_nodes(&self) -> Vec<Vector2<f64>> {
        self.basis
            .nodes()
            .iter()
            .map(|xi| self.reference_to_parametric(xi))
            .collect()
    }

    /// `|det B|`, twice the parametric area.
    pub fn reference_jacobian_det(&self) -> f64 {
        self.b.determinant().abs()
    }

    pub fn reference_to_parametric(&self, xi: &Vector2<f64>) -> Vector2<f64> {
        self.parametric_triangle[0] + self.b * xi
    }

    pub fn parametric_to_reference(&self, s: &Vector2<f64>) -> Vector2<f64> {
        self.b_inv * (s - self.parametric_triangle[0])
    }

    /// `d xi / d s`, used to turn reference gradients into parametric ones.
    pub fn reference_gradient_map(&self) -> Matrix2<f64> {
        self.b_inv
    }

    pub fn point_at_reference(&self, xi: &Vector2<f64>) -> Vector3<f64> {
        let n = self.nodes.len();
        let mut v = [0.0; 64];
        self.basis.values(xi, &mut v[..n]);
        self.nodes.iter().zip(&v[..n]).map(|(p, w)| p * *w).sum()
    }

    pub fn point_at(&self, s: &Vector2<f64>) -> Vector3<f64> {
        self.point_at_reference(&self.parametric_to_reference(s))
    }

    /// Point and parametric Jacobian at a reference point.
    pub fn jet_at_reference(&self, xi: &Vector2<f64>) -> (Vector3<f64>, Matrix3x2<f64>) {
        let n = self.nodes.len();
        let mut v = [0.0; 64];
        let mut g = [Vector2::zeros(); 64];
        self.basis.values_and_gradients(xi, &mut v[..n], &mut g[..n]);
        let mut x = Vector3::zeros();
        let mut jr = Matrix3x2::zeros();
        for i in 0..n {
            x += self.nodes[i] * v[i];
            jr += self.nodes[i] * g[i].transpose();
        }
        (x, jr * self.b_inv)
    }

    pub fn metric_at_reference(&self, xi: &Vector2<f64>) -> Result<MetricSample> {
        MetricSample::from_jacobian(self.jet_at_reference(xi).1)
    }

    /// Jacobian, metric and area element at parametric point `s`.
    pub fn metric_at(&self, s: &Vector2<f64>) -> Result<MetricSample> {
        self.metric_at_reference(&self.parametric_to_reference(s))
    }

    /// Endpoints of local edge `edge` (vertex `edge` to vertex `edge + 1`).
    pub fn edge_endpoints(&self, edge: usize) -> (Vector2<f64>, Vector2<f64>) {
        (self.parametric_triangle[edge], self.parametric_triangle[(edge + 1) % 3])
    }

    /// Stretch factor and conormal at `t` in `[0, 1]` along local edge `edge`.
    pub fn edge_geometry(&self, edge: usize, t: f64) -> Result<EdgeSample> {
        assert!(edge < 3, "edge index out of range");
        let (a, b) = self.edge_endpoints(edge);
        let s = a + (b - a) * t;
        let metric = self.metric_at(&s)?;
        Ok(edge_sample(&metric, &(b - a), s))
    }
}

/// Edge quantities for a metric sample at a point of an edge with
/// parametric direction `dir` (counter-clockwise around the triangle).
pub fn edge_sample(metric: &MetricSample, dir: &Vector2<f64>, point: Vector2<f64>) -> EdgeSample {
    let tau = dir.normalize();
    let l_g = (metric.jacobian * tau).norm();
    let nhat = Vector2::new(tau.y, -tau.x);
    let w = metric.g_inv() * nhat;
    let conormal = w / nhat.dot(&w).sqrt();
    EdgeSample {
        l_g,
        conormal,
        point,
        metric: *metric,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Curved patch whose Lagrange nodes are the Newton projections of the
/// lattice nodes of the parametric triangle onto the graph of `poly`.
pub fn build_patch_map(
    poly: &FittedPolynomial,
    frame: &LocalFrame,
    parametric_triangle: [Vector2<f64>; 3],
    basis: Arc<LagrangeBasis>,
    newton: &NewtonOptions,
) -> Result<PatchMap> {
    let [a, b1, b2] = parametric_triangle;
    let nodes = basis
        .nodes()
        .iter()
        .map(|xi| {
            let s = a + (b1 - a) * xi.x + (b2 - a) * xi.y;
            let proj = newton_project(poly, &s, newton.tol, newton.max_iter)?;
            Ok(frame.to_global(&proj.psi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchMap::from_nodes(*frame, parametric_triangle, basis, nodes))
}

/// Lagrange interpolant of the exact closest-point map over a flat triangle.
pub fn build_exact_patch_map(
    surface: &ExactSurface,
    tri: &[Vector3<f64>; 3],
    basis: Arc<LagrangeBasis>,
) -> Result<PatchMap> {
    let frame = build_local_frame(tri)?;
    let pt = frame.parametric_triangle(tri);
    let [a, b1, b2] = pt;
    let nodes = basis
        .nodes()
        .iter()
        .map(|xi| surface.closest_point(&frame.plane_point(&(a + (b1 - a) * xi.x + (b2 - a) * xi.y))))
        .collect();
    Ok(PatchMap::from_nodes(frame, pt, basis, nodes))
}

/// Exact lift of a parametric point and its Jacobian with respect to `s`.
pub fn exact_jet(surface: &ExactSurface, frame: &LocalFrame, s: &Vector2<f64>) -> (Vector3<f64>, Matrix3x2<f64>) {
    let x = frame.plane_point(s);
    let dp = surface.closest_point_jacobian(&x);
    let tangents = Matrix3x2::from_columns(&[frame.tangent1, frame.tangent2]);
    (surface.closest_point(&x), dp * tangents)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct ReconstructionOptions {
    pub fit: FitOptions,
    pub newton: NewtonOptions,
}

/// Build every patch of `mesh` from `cloud` (parallel over triangles).
///
/// On failure the error of the lowest-numbered failing triangle is returned,
/// tagged with that triangle's index.
pub fn reconstruct_patches(
    mesh: &ReferenceMesh,
    cloud: &PointCloud,
    k: usize,
    options: &ReconstructionOptions,
) -> Result<Vec<PatchMap>> {
    let basis = Arc::new(LagrangeBasis::new(k));
    let results: Vec<Result<PatchMap>> = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle_points(t);
            (|| {
                let frame = build_local_frame(&tri)?;
                let pt = frame.parametric_triangle(&tri);
                let poly = fit_patch_polynomial(cloud, &frame, &pt, k, &options.fit)?;
                build_patch_map(&poly, &frame, pt, basis.clone(), &options.newton)
            })()
            .map_err(|e| e.on_triangle(t))
        })
        .collect();
    results.into_iter().collect()
}

/// Patches interpolating the exact surface (for error studies on test geometries).
pub fn exact_patches(mesh: &ReferenceMesh, surface: &ExactSurface, k: usize) -> Result<Vec<PatchMap>> {
    let basis = Arc::new(LagrangeBasis::new(k));
    let results: Vec<Result<PatchMap>> = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| build_exact_patch_map(surface, &mesh.triangle_points(t), basis.clone()).map_err(|e| e.on_triangle(t)))
        .collect();
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Unit};

    fn flat_patch(k: usize) -> PatchMap {
        let tri = [
            Vector3::new(0.1, 0.2, 0.0),
            Vector3::new(0.5, 0.25, 0.0),
            Vector3::new(0.2, 0.6, 0.0),
        ];
        let frame = build_local_frame(&tri).unwrap();
        build_patch_map(
            &FittedPolynomial::zero(k),
            &frame,
            frame.parametric_triangle(&tri),
            Arc::new(LagrangeBasis::new(k)),
            &NewtonOptions::default(),
        )
        .unwrap()
    }

    fn sphere_patch(k: usize, scale: f64) -> PatchMap {
        let tri = [
            Vector3::new(1.0, 0.0, 0.1).normalize(),
            Vector3::new(1.0, 0.3, 0.0).normalize(),
            Vector3::new(1.0, 0.05, 0.35).normalize(),
        ]
        .map(|p| (Vector3::new(1.0, 0.0, 0.0) + (p - Vector3::new(1.0, 0.0, 0.0)) * scale).normalize());
        build_exact_patch_map(&ExactSurface::UnitSphere, &tri, Arc::new(LagrangeBasis::new(k))).unwrap()
    }

    #[test]
    fn flat_patch_is_affine_with_identity_metric() {
        for k in 1..=4 {
            let p = flat_patch(k);
            let m = p.metric_at(&Vector2::new(0.01, -0.02)).unwrap();
            assert!((m.g - Matrix2::identity()).norm() < 1e-12);
            assert!((m.sqrt_det_g - 1.0).abs() < 1e-12);
            for e in 0..3 {
                let s = p.edge_geometry(e, 0.3).unwrap();
                assert!((s.l_g - 1.0).abs() < 1e-12);
                let (a, b) = p.edge_endpoints(e);
                let d = (b - a).normalize();
                assert!((s.conormal - Vector2::new(d.y, -d.x)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn map_reproduces_nodes() {
        let p = sphere_patch(3, 1.0);
        for (s, x) in p.parametric_nodes().iter().zip(p.nodes()) {
            assert!((p.point_at(s) - x).norm() < 1e-12);
        }
    }

    #[test]
    fn conormal_contract_on_curved_patch() {
        let p = sphere_patch(3, 1.0);
        for e in 0..3 {
            for t in [0.1, 0.5, 0.87] {
                let s = p.edge_geometry(e, t).unwrap();
                let g = s.metric.g;
                let (a, b) = p.edge_endpoints(e);
                let tau = b - a;
                assert!((s.conormal.dot(&(g * s.conormal)) - 1.0).abs() < 1e-12);
                assert!(s.conormal.dot(&(g * tau)).abs() < 1e-12);
                assert!(s.conormal.dot(&Vector2::new(tau.y, -tau.x)) > 0.0);
            }
        }
    }

    #[test]
    fn edge_length_matches_dense_arclength() {
        let p = sphere_patch(3, 1.0);
        for e in 0..3 {
            let (a, b) = p.edge_endpoints(e);
            let len = (b - a).norm();
            // 8-point Gauss-Legendre of l_g is exact enough for a smooth polynomial curve
            let (x, w) = gauss8();
            let integral: f64 = x
                .iter()
                .zip(w)
                .map(|(t, w)| w * p.edge_geometry(e, *t).unwrap().l_g * len)
                .sum();
            let n = 10_000;
            let mut arc = 0.0;
            let mut prev = p.point_at(&a);
            for i in 1..=n {
                let q = p.point_at(&(a + (b - a) * (i as f64 / n as f64)));
                arc += (q - prev).norm();
                prev = q;
            }
            assert!(((integral - arc) / arc).abs() < 1e-8, "{integral} {arc}");
        }
    }

    fn gauss8() -> ([f64; 8], [f64; 8]) {
        let x = [
            -0.960_289_856_497_536_3,
            -0.796_666_477_413_626_7,
            -0.525_532_409_916_329,
            -0.183_434_642_495_649_8,
            0.183_434_642_495_649_8,
            0.525_532_409_916_329,
            0.796_666_477_413_626_7,
            0.960_289_856_497_536_3,
        ];
        let w = [
            0.101_228_536_290_376_26,
            0.222_381_034_453_374_47,
            0.313_706_645_877_887_3,
            0.362_683_783_378_362,
            0.362_683_783_378_362,
            0.313_706_645_877_887_3,
            0.222_381_034_453_374_47,
            0.101_228_536_290_376_26,
        ];
        (x.map(|t| 0.5 * (t + 1.0)), w.map(|w| 0.5 * w))
    }

    #[test]
    fn exact_graph_metric_is_identity_at_contact_point() {
        // graph of the upper hemisphere over its tangent plane at the north pole
        let frame = LocalFrame {
            origin: Vector3::new(0.0, 0.0, 1.0),
            tangent1: Vector3::x(),
            tangent2: Vector3::y(),
            normal: Vector3::z(),
        };
        let (_, j) = exact_jet(&ExactSurface::UnitSphere, &frame, &Vector2::zeros());
        let m = MetricSample::from_jacobian(j).unwrap();
        assert!((m.g - Matrix2::identity()).norm() < 1e-12);
    }

    #[test]
    fn metric_error_gains_an_order_over_jacobian() {
        // nodes displaced along the normal by O(h^(k+1)), as a point-cloud fit does, against the
        // exact-surface patch: |J - J_h| = O(h^k) but |g - g_h| = O(h^(k+1))
        for k in 1..=2 {
            let mut jerr = Vec::new();
            let mut gerr = Vec::new();
            for scale in [0.5, 0.25, 0.125] {
                let exact = sphere_patch(k, scale);
                let h = scale * 0.4;
                let nodes: Vec<Vector3<f64>> = exact
                    .nodes()
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x * (1.0 + h.powi(k as i32 + 1) * ((i as f64 * 1.7).sin() + 0.3)))
                    .collect();
                let p = PatchMap::from_nodes(*exact.frame(), *exact.parametric_triangle(), exact.basis.clone(), nodes);
                let mut ej: f64 = 0.0;
                let mut eg: f64 = 0.0;
                for xi in [Vector2::new(0.2, 0.3), Vector2::new(0.6, 0.1), Vector2::new(0.1, 0.7)] {
                    let (_, jh) = p.jet_at_reference(&xi);
                    let (_, je) = exact.jet_at_reference(&xi);
                    ej = ej.max((jh - je).norm());
                    eg = eg.max((jh.transpose() * jh - je.transpose() * je).norm());
                }
                jerr.push(ej);
                gerr.push(eg);
            }
            let oj = (jerr[1] / jerr[2]).log2();
            let og = (gerr[1] / gerr[2]).log2();
            assert!((oj - k as f64).abs() < 0.3, "k={k} jacobian order {oj} {jerr:?}");
            assert!(og > k as f64 + 0.7, "k={k} metric order {og} {gerr:?}");
        }
    }

    #[test]
    fn quantities_invariant_under_rotation() {
        let p = sphere_patch(2, 1.0);
        let q = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(0.3, -1.0, 0.4)), 1.1);
        let tri: [Vector3<f64>; 3] = std::array::from_fn(|i| {
            let v = p.frame().plane_point(&p.parametric_triangle()[i]);
            q * v
        });
        let r = build_exact_patch_map(
            &ExactSurface::UnitSphere,
            &tri.map(|v| v),
            Arc::new(LagrangeBasis::new(2)),
        );
        // the rotated sphere is the sphere, so both patches must agree up to rotation
        let r = r.unwrap();
        let xi = Vector2::new(0.3, 0.3);
        let a = p.metric_at_reference(&xi).unwrap();
        let b = r.metric_at_reference(&xi).unwrap();
        assert!((a.sqrt_det_g - b.sqrt_det_g).abs() < 1e-12);
        assert!((q * p.point_at_reference(&xi) - r.point_at_reference(&xi)).norm() < 1e-12);
    }
}
