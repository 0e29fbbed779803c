use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::cloud::PointCloud;
use super::mesh::ReferenceMesh;
use crate::error::{Error, Result};
use crate::geometry::ExactSurface;

/// Largest-to-smallest singular value ratio above which a neighbour set is
/// treated as collinear.
const COLLINEAR_RATIO: f64 = 1e8;
/// Neighbour sets whose middle-to-largest scatter eigenvalue ratio is below
/// this are widened and thinned before the plane fit.
const MIN_ISOTROPY: f64 = 0.1;

/// Split every triangle into four at its edge midpoints.
///
/// Old vertices keep their indices; the midpoint of edge `e` gets index `V + e`.
pub fn refine_uniform(mesh: &ReferenceMesh) -> ReferenceMesh {
    let nv = mesh.vertices().len();
    let mut v = mesh.vertices().to_vec();
    v.extend(
        mesh.edges()
            .iter()
            .map(|e| (mesh.vertices()[e.vertices[0]] + mesh.vertices()[e.vertices[1]]) * 0.5),
    );
    let mut mid = vec![[0usize; 3]; mesh.triangles().len()];
    for (ei, e) in mesh.edges().iter().enumerate() {
        for &(t, i) in &e.incidences {
            mid[t][i] = nv + ei;
        }
    }
    let mut f = Vec::with_capacity(4 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = *tri;
        let [mab, mbc, mca] = mid[t];
        f.push([a, mab, mca]);
        f.push([mab, b, mbc]);
        f.push([mca, mbc, c]);
        f.push([mab, mbc, mca]);
    }
    ReferenceMesh::new(v, f, mesh.level() + 1).expect("midpoint refinement preserves validity")
}

fn scatter(points: &[Vector3<f64>]) -> (Vector3<f64>, Matrix3<f64>) {
    let c = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    (c, cov)
}

/// Middle-to-largest eigenvalue ratio of the scatter matrix (0 for collinear sets).
fn isotropy(points: &[Vector3<f64>]) -> f64 {
    let mut ev: Vec<f64> = scatter(points).1.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    if ev[2] > 0.0 {
        ev[1].max(0.0) / ev[2]
    } else {
        0.0
    }
}

/// Greedy farthest-point subset of `pool` of size `n`, seeded with `pool[0]`.
fn farthest_point_subset(pool: &[Vector3<f64>], n: usize) -> Vec<Vector3<f64>> {
    let mut chosen = vec![0usize];
    let mut dist: Vec<f64> = pool.iter().map(|p| (p - pool[0]).norm_squared()).collect();
    while chosen.len() < n.min(pool.len()) {
        let best = (0..pool.len()).fold(0, |b, i| if dist[i] > dist[b] { i } else { b });
        chosen.push(best);
        for (d, p) in dist.iter_mut().zip(pool) {
            *d = d.min((p - pool[best]).norm_squared());
        }
    }
    chosen.iter().map(|&i| pool[i]).collect()
}

/// Orthogonal projection of `x` onto the total-least-squares plane of `points`.
pub fn project_to_tls_plane(x: &Vector3<f64>, points: &[Vector3<f64>]) -> Result<Vector3<f64>> {
    let (c, cov) = scatter(points);
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mid = eig.eigenvalues[order[1]].max(0.0);
    let hi = eig.eigenvalues[order[2]].max(0.0);
    // singular values are square roots of the scatter eigenvalues
    if !(mid > 0.0) || (hi / mid).sqrt() > COLLINEAR_RATIO {
        let condition = if mid > 0.0 { hi / mid } else { f64::INFINITY };
        return Err(Error::RankDeficientFit {
            condition,
            bound: COLLINEAR_RATIO * COLLINEAR_RATIO,
        });
    }
    let n = eig.eigenvectors.column(order[0]).into_owned();
    Ok(x - n * n.dot(&(x - c)))
}

/// Uniform refinement followed by projecting every vertex onto the
/// total-least-squares plane of its `knn` nearest cloud points.
pub fn refine_and_project(mesh: &ReferenceMesh, cloud: &PointCloud, knn: usize) -> Result<ReferenceMesh> {
    if knn < 3 {
        return Err(Error::InvalidArgument(format!("knn must be at least 3, got {knn}")));
    }
    let r = refine_uniform(mesh);
    let v = project_vertices(r.vertices(), cloud, knn)?;
    Ok(r.with_vertices(v))
}

/// Project every point onto the TLS plane of its `knn` nearest cloud points.
///
/// Where those neighbours are nearly collinear (anisotropic samplings, such as
/// the rings of a latitude-longitude lattice near a pole), the plane is fitted
/// instead to `knn` points thinned by farthest-point sampling from the
/// `4 knn` nearest.
pub fn project_vertices(vertices: &[Vector3<f64>], cloud: &PointCloud, knn: usize) -> Result<Vec<Vector3<f64>>> {
    let gather = |x: &Vector3<f64>, n: usize| -> Vec<Vector3<f64>> {
        cloud.knn(x, n).iter().map(|&i| cloud.points()[i]).collect()
    };
    vertices
        .par_iter()
        .map(|x| {
            let mut nb = gather(x, knn);
            if isotropy(&nb) < MIN_ISOTROPY {
                nb = farthest_point_subset(&gather(x, 4 * knn), knn);
            }
            project_to_tls_plane(x, &nb)
        })
        .collect()
}

/// Uniform refinement with vertices moved to the exact surface.
pub fn refine_onto_surface(mesh: &ReferenceMesh, surface: &ExactSurface) -> ReferenceMesh {
    let r = refine_uniform(mesh);
    let v = r.vertices().iter().map(|p| surface.closest_point(p)).collect();
    r.with_vertices(v)
}
