//! On flat meshes the assembled IPDG matrices must agree with a direct
//! evaluation of the textbook symmetric interior-penalty form, and patches
//! reconstructed from a planar cloud must reproduce the affine ones.

mod common;

use nalgebra::{DMatrix, Matrix2, Vector2, Vector3};
use pcdg::dgcore::{assemble_bilinear, assemble_mass, gauss_legendre, AssemblyOptions, DGSpace, JumpVariant};
use pcdg::geometry::{exact_patches, reconstruct_patches, ExactSurface, ReconstructionOptions};
use pcdg::meshgen::{flat_square_mesh, ReferenceMesh};

/// Tensor Gauss rule on the reference triangle through the collapsed square.
fn triangle_rule(n: usize) -> Vec<(Vector2<f64>, f64)> {
    let (x, w) = gauss_legendre(n);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (0.5 * (x[i] + 1.0), 0.5 * (x[j] + 1.0));
            out.push((Vector2::new(u * (1.0 - v), v), 0.25 * w[i] * w[j] * (1.0 - v)));
        }
    }
    out
}

/// Value and ambient gradient of `c` on triangle `t` at reference point `xi`.
fn eval(space: &DGSpace, c: &[f64], t: usize, xi: &Vector2<f64>) -> (f64, Vector3<f64>) {
    let (u, gs) = space.evaluate_with_gradient(c, t, xi);
    let (_, j) = space.patches()[t].jet_at_reference(xi);
    let g: Matrix2<f64> = j.transpose() * j;
    (u, j * (g.try_inverse().unwrap() * gs))
}

/// Reference coordinates of `x` in the (flat) triangle `t`.
fn to_reference(mesh: &ReferenceMesh, t: usize, x: &Vector3<f64>) -> Vector2<f64> {
    let [a, b, c] = mesh.triangle_points(t);
    let m = nalgebra::Matrix3x2::from_columns(&[b - a, c - a]);
    (m.transpose() * m).try_inverse().unwrap() * (m.transpose() * (x - a))
}

/// Unit in-plane normal of edge `ab` of triangle `t`, pointing away from `t`.
fn outward(mesh: &ReferenceMesh, t: usize, a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    let [p, q, r] = mesh.triangle_points(t);
    let centroid = (p + q + r) / 3.0;
    let e = (b - a).normalize();
    let d = (a - centroid) - e * e.dot(&(a - centroid));
    d.normalize()
}

/// `a(u, v)` for the basis vectors of `space`, entry by entry.
fn oracle_matrix(space: &DGSpace, beta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mesh = space.mesh();
    let n = space.n_dofs();
    let nc = space.dofs_per_cell();
    let unit = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    let rule = triangle_rule(8);
    for t in 0..mesh.triangles().len() {
        let [p, q, r] = mesh.triangle_points(t);
        let area2 = (q - p).cross(&(r - p)).norm();
        let o = space.offset(t);
        for i in o..o + nc {
            for j in o..o + nc {
                let (ui, uj) = (unit(i), unit(j));
                for (xi, w) in &rule {
                    let (vi, gi) = eval(space, &ui, t, xi);
                    let (vj, gj) = eval(space, &uj, t, xi);
                    a[(i, j)] += w * area2 * (gi.dot(&gj) + vi * vj);
                    m[(i, j)] += w * area2 * vi * vj;
                }
            }
        }
    }
    let h = mesh.h();
    let (gx, gw) = gauss_legendre(8);
    for edge in mesh.edges().iter().filter(|e| e.is_interior()) {
        let [ia, ib] = edge.vertices;
        let (xa, xb) = (mesh.vertices()[ia], mesh.vertices()[ib]);
        let len = (xb - xa).norm();
        let mut tris = [edge.incidences[0].0, edge.incidences[1].0];
        tris.sort();
        let normal = outward(mesh, tris[0], &xa, &xb);
        let dofs: Vec<usize> = tris
            .iter()
            .flat_map(|&t| space.offset(t)..space.offset(t) + nc)
            .collect();
        for &i in &dofs {
            for &j in &dofs {
                let (ui, uj) = (unit(i), unit(j));
                for (s, w) in gx.iter().zip(&gw) {
                    let x = xa + (xb - xa) * (0.5 * (s + 1.0));
                    let side = |c: &[f64], t: usize| eval(space, c, t, &to_reference(mesh, t, &x));
                    let ((pi, gpi), (mi, gmi)) = (side(&ui, tris[0]), side(&ui, tris[1]));
                    let ((pj, gpj), (mj, gmj)) = (side(&uj, tris[0]), side(&uj, tris[1]));
                    let (jump_i, jump_j) = (pi - mi, pj - mj);
                    let (avg_i, avg_j) = (0.5 * (gpi + gmi).dot(&normal), 0.5 * (gpj + gmj).dot(&normal));
                    let form = -avg_j * jump_i - avg_i * jump_j + beta / h * jump_i * jump_j;
                    a[(i, j)] += 0.5 * w * len * form;
                }
            }
        }
    }
    (a, m)
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max()
}

#[test]
fn assembled_flat_matrices_match_direct_form_evaluation() {
    let mesh = flat_square_mesh(2, 1.0);
    for l in 1..=3 {
        let patches = exact_patches(&mesh, &ExactSurface::PlaneZ0, 1).unwrap();
        let space = DGSpace::new(mesh.clone(), patches, l).unwrap();
        let (want_a, want_m) = oracle_matrix(&space, AssemblyOptions::default_beta(l));
        for jump in [JumpVariant::Averaged, JumpVariant::Product] {
            let opts = AssemblyOptions {
                jump,
                ..AssemblyOptions::for_degree(l)
            };
            let a = assemble_bilinear(&space, &opts).unwrap().to_dense();
            let m = assemble_mass(&space, 0).unwrap().to_dense();
            assert!(
                rel_diff(&a, &want_a) < 1e-12,
                "l = {l} {jump:?}: {:e}",
                rel_diff(&a, &want_a)
            );
            assert!(rel_diff(&m, &want_m) < 1e-12, "l = {l}: {:e}", rel_diff(&m, &want_m));
        }
    }
}

#[test]
fn planar_cloud_reproduces_affine_geometry_and_matrices() {
    let mesh = flat_square_mesh(4, 1.0);
    let cloud = common::planar_cloud(61);
    for k in 1..=3 {
        let rec = reconstruct_patches(&mesh, &cloud, k, &ReconstructionOptions::default()).unwrap();
        let exact = exact_patches(&mesh, &ExactSurface::PlaneZ0, k).unwrap();
        for (p, q) in rec.iter().zip(&exact) {
            for (x, y) in p.nodes().iter().zip(q.nodes()) {
                assert!((x - y).norm() < 1e-12, "k = {k}: node {x} vs {y}");
            }
        }
    }
    let d = common::flat_equivalence();
    assert!(d <= 1e-10, "{d:e}");
}
