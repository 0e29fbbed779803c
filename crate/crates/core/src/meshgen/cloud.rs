use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::kdtree::KdTree;
use crate::error::{Error, Result};
use crate::geometry::ExactSurface;

/// Scattered surface samples with an exact spatial index.
#[derive(Debug, Clone)]
pub struct PointCloud {
    tree: KdTree,
    filling_distance: f64,
}

impl PointCloud {
    /// Index `points`; rejects empty clouds and repeated points.
    ///
    /// The filling-distance estimate is the leave-one-out nearest-neighbour
    /// distance maximized over the cloud.
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point cloud is empty".into()));
        }
        if let Some(i) = points
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(Error::InvalidArgument(format!("point {i} is not finite")));
        }
        let tree = KdTree::new(points);
        let nn: Vec<(f64, usize, usize)> = tree
            .points()
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let r = tree.knn_with_distances(p, 2);
                let other = r.iter().find(|&&(_, j)| j != i).copied().unwrap_or((f64::INFINITY, i));
                (other.0, i, other.1)
            })
            .collect();
        if let Some(&(_, i, j)) = nn.iter().find(|x| x.0 == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "point cloud has duplicate points {} and {}",
                i.min(j),
                i.max(j)
            )));
        }
        let filling_distance = if nn.len() > 1 {
            nn.iter().map(|x| x.0).fold(0.0, f64::max).sqrt()
        } else {
            0.0
        };
        Ok(Self { tree, filling_distance })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        self.tree.points()
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn filling_distance(&self) -> f64 {
        self.filling_distance
    }

    pub fn knn(&self, q: &Vector3<f64>, k: usize) -> Vec<usize> {
        self.tree.knn(q, k)
    }

    pub fn within_radius(&self, q: &Vector3<f64>, r: f64) -> Vec<usize> {
        self.tree.within_radius(q, r)
    }

    pub fn nearest_distance(&self, q: &Vector3<f64>) -> f64 {
        self.tree.nearest(q).map(|x| x.0).unwrap_or(f64::INFINITY)
    }
}

/// Largest distance from a probe point to its nearest cloud point.
pub fn estimate_filling_distance(cloud: &PointCloud, probes: &[Vector3<f64>]) -> f64 {
    probes
        .par_iter()
        .map(|p| cloud.nearest_distance(p))
        .reduce(|| 0.0, f64::max)
}

/// Unit-sphere samples on the `(theta, phi)` lattice
/// `theta_i = i pi / (n_theta - 1)`, `phi_j = 2 pi j / n_phi`, with one point per pole.
pub fn sample_sphere_cloud(n_theta: usize, n_phi: usize) -> Result<PointCloud> {
    if n_theta < 4 || n_phi < 4 {
        return Err(Error::InvalidArgument(format!(
            "sphere lattice needs n_theta, n_phi >= 4, got ({n_theta}, {n_phi})"
        )));
    }
    let mut pts = vec![Vector3::z()];
    for i in 1..n_theta - 1 {
        let theta = i as f64 * PI / (n_theta - 1) as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..n_phi {
            let (sp, cp) = (2.0 * PI * j as f64 / n_phi as f64).sin_cos();
            pts.push(Vector3::new(st * cp, st * sp, ct));
        }
    }
    pts.push(-Vector3::z());
    PointCloud::new(pts)
}

/// Samples of the torus `((4 cos t + 1) cos f, (4 cos t + 1) sin f, 4 sin t)`
/// on a uniform `(t, f)` lattice.
pub fn sample_torus_cloud(n_theta: usize, n_phi: usize) -> Result<PointCloud> {
    sample_torus_cloud_with(1.0, 4.0, n_theta, n_phi)
}

/// Uniform `(theta, phi)` lattice samples of a torus with the given radii.
pub fn sample_torus_cloud_with(major: f64, minor: f64, n_theta: usize, n_phi: usize) -> Result<PointCloud> {
    if n_theta < 4 || n_phi < 4 {
        return Err(Error::InvalidArgument(format!(
            "torus lattice needs n_theta, n_phi >= 4, got ({n_theta}, {n_phi})"
        )));
    }
    let mut pts = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = 2.0 * PI * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            pts.push(ExactSurface::torus_point(major, minor, theta, phi));
        }
    }
    PointCloud::new(pts)
}
