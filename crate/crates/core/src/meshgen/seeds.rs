use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::Vector3;

use super::mesh::ReferenceMesh;
use super::refine::refine_uniform;
use crate::error::{Error, Result};
use crate::geometry::ExactSurface;

/// Vertex count of the default sphere seed; uniform refinement then gives
/// 882, 3522, 14082, ... vertices.
pub const SPHERE_SEED_VERTICES: usize = 222;

/// Points of the spherical Fibonacci lattice.
pub fn fibonacci_sphere_points(n: usize) -> Vec<Vector3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            Vector3::new(r * c, r * s, z)
        })
        .collect()
}

/// Outward-oriented convex hull of points in general position.
pub fn convex_hull(points: &[Vector3<f64>]) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 4 {
        return Err(Error::InvalidArgument("convex hull needs at least 4 points".into()));
    }
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
    let eps = 1e-12 * scale;
    // initial tetrahedron
    let a = 0;
    let b = (1..n)
        .max_by(|&i, &j| {
            (points[i] - points[a])
                .norm()
                .total_cmp(&(points[j] - points[a]).norm())
        })
        .unwrap();
    let c = (0..n)
        .max_by(|&i, &j| {
            let f = |k: usize| (points[b] - points[a]).cross(&(points[k] - points[a])).norm();
            f(i).total_cmp(&f(j))
        })
        .unwrap();
    let vol = |k: usize| {
        (points[b] - points[a])
            .cross(&(points[c] - points[a]))
            .dot(&(points[k] - points[a]))
    };
    let d = (0..n).max_by(|&i, &j| vol(i).abs().total_cmp(&vol(j).abs())).unwrap();
    if vol(d).abs() <= eps * scale * scale {
        return Err(Error::InvalidArgument("convex hull input is coplanar".into()));
    }
    let mut faces: Vec<[usize; 3]> = if vol(d) < 0.0 {
        vec![[a, b, c], [a, d, b], [b, d, c], [c, d, a]]
    } else {
        vec![[a, c, b], [a, b, d], [b, c, d], [c, a, d]]
    };
    let normal = |f: &[usize; 3]| (points[f[1]] - points[f[0]]).cross(&(points[f[2]] - points[f[0]]));
    for p in 0..n {
        if p == a || p == b || p == c || p == d {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| normal(f).dot(&(points[p] - points[f[0]])) > eps)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut vis_edges = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|x| *x.1) {
            for i in 0..3 {
                vis_edges.insert((f[i], f[(i + 1) % 3]));
            }
        }
        let mut next = Vec::with_capacity(faces.len() + 2);
        let mut horizon = Vec::new();
        for (f, &v) in faces.iter().zip(&visible) {
            if v {
                for i in 0..3 {
                    let (u, w) = (f[i], f[(i + 1) % 3]);
                    if !vis_edges.contains(&(w, u)) {
                        horizon.push([u, w, p]);
                    }
                }
            } else {
                next.push(*f);
            }
        }
        next.extend(horizon);
        faces = next;
    }
    Ok(faces)
}

/// Closed sphere seed: convex hull of `n` Fibonacci points.
pub fn fibonacci_sphere_mesh(n: usize) -> Result<ReferenceMesh> {
    let pts = fibonacci_sphere_points(n);
    let faces = convex_hull(&pts)?;
    let used: HashSet<usize> = faces.iter().flatten().copied().collect();
    if used.len() != n {
        return Err(Error::NonManifoldMesh("hull dropped input points".into()));
    }
    ReferenceMesh::new_closed(pts, faces, 0)
}

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> ReferenceMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let v: Vec<Vector3<f64>> = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z).normalize()).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    ReferenceMesh::new_closed(v, f, 0).expect("icosahedron is a closed manifold")
}

/// Icosahedron refined `levels` times with new vertices pushed to the unit sphere.
pub fn icosphere(levels: usize) -> ReferenceMesh {
    let mut m = icosahedron();
    for _ in 0..levels {
        let r = refine_uniform(&m);
        let v = r.vertices().iter().map(|p| p.normalize()).collect();
        m = r.with_vertices(v);
    }
    m
}

/// Structured torus triangulation: `n_theta` vertices around the tube,
/// `n_phi` around the axis, each grid quad split along one diagonal.
pub fn torus_grid_mesh(major: f64, minor: f64, n_theta: usize, n_phi: usize) -> Result<ReferenceMesh> {
    if n_theta < 3 || n_phi < 3 {
        return Err(Error::InvalidArgument(
            "torus grid needs at least 3 x 3 vertices".into(),
        ));
    }
    let mut v = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = 2.0 * PI * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            v.push(ExactSurface::torus_point(major, minor, theta, phi));
        }
    }
    let id = |i: usize, j: usize| (i % n_theta) * n_phi + (j % n_phi);
    let mut f = Vec::with_capacity(2 * n_theta * n_phi);
    // d/dphi x d/dtheta points out of the tube, so (i,j) -> (i,j+1) -> (i+1,j+1) is outward
    for i in 0..n_theta {
        for j in 0..n_phi {
            f.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    ReferenceMesh::new_closed(v, f, 0)
}

/// Triangulated square `[0, size]^2` in the plane `z = 0` (open, for flat tests).
pub fn flat_square_mesh(n: usize, size: f64) -> ReferenceMesh {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(Vector3::new(
                size * i as f64 / n as f64,
                size * j as f64 / n as f64,
                0.0,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut f = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    ReferenceMesh::new(v, f, 0).expect("square grid is a valid triangulation")
}
