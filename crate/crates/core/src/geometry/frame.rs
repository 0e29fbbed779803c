use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Orthonormal frame attached to a flat reference triangle.
///
/// The origin is the barycenter, `tangent1`/`tangent2` span the triangle plane
/// and `normal = tangent1 x tangent2` follows the triangle's vertex ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vector3<f64>,
    pub tangent1: Vector3<f64>,
    pub tangent2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

/// Relative area threshold below which a triangle counts as degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-14;

pub fn triangle_diameter(tri: &[Vector3<f64>; 3]) -> f64 {
    (tri[1] - tri[0])
        .norm()
        .max((tri[2] - tri[1]).norm())
        .max((tri[0] - tri[2]).norm())
}

pub fn build_local_frame(tri: &[Vector3<f64>; 3]) -> Result<LocalFrame> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let cross = e1.cross(&e2);
    let area = 0.5 * cross.norm();
    let diam = triangle_diameter(tri);
    let threshold = DEGENERACY_RATIO * diam * diam;
    if !(area > threshold) {
        return Err(Error::DegenerateTriangle { area, threshold });
    }
    let normal = cross / (2.0 * area);
    let tangent1 = e1.normalize();
    let tangent2 = normal.cross(&tangent1);
    Ok(LocalFrame {
        origin: (tri[0] + tri[1] + tri[2]) / 3.0,
        tangent1,
        tangent2,
        normal,
    })
}

impl LocalFrame {
    /// Global point to frame coordinates `(s1, s2, v)`.
    pub fn to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let d = p - self.origin;
        Vector3::new(d.dot(&self.tangent1), d.dot(&self.tangent2), d.dot(&self.normal))
    }

    /// Global vector (no translation) to frame components.
    pub fn vector_to_local(&self, d: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(d.dot(&self.tangent1), d.dot(&self.tangent2), d.dot(&self.normal))
    }

    pub fn to_global(&self, q: &Vector3<f64>) -> Vector3<f64> {
        self.origin + self.tangent1 * q.x + self.tangent2 * q.y + self.normal * q.z
    }

    pub fn vector_to_global(&self, q: &Vector3<f64>) -> Vector3<f64> {
        self.tangent1 * q.x + self.tangent2 * q.y + self.normal * q.z
    }

    /// In-plane point `(s1, s2)` to global coordinates.
    pub fn plane_point(&self, s: &Vector2<f64>) -> Vector3<f64> {
        self.origin + self.tangent1 * s.x + self.tangent2 * s.y
    }

    /// Triangle vertices in frame coordinates (normal component dropped; it is zero).
    pub fn parametric_triangle(&self, tri: &[Vector3<f64>; 3]) -> [Vector2<f64>; 3] {
        tri.map(|p| self.to_local(&p).xy())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Unit};

    #[test]
    fn axis_aligned_triangle() {
        let tri = [Vector3::zeros(), Vector3::x(), Vector3::y()];
        let f = build_local_frame(&tri).unwrap();
        assert!((f.origin - Vector3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((f.normal - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let tri = [Vector3::zeros(), Vector3::x(), Vector3::new(1.0, 1e-16, 0.0)];
        assert!(matches!(build_local_frame(&tri), Err(Error::DegenerateTriangle { .. })));
    }

    #[test]
    fn frame_is_orthonormal_and_contains_vertices() {
        let tri = [
            Vector3::new(0.3, -1.2, 0.5),
            Vector3::new(1.1, 0.4, -0.2),
            Vector3::new(-0.4, 0.9, 1.3),
        ];
        let f = build_local_frame(&tri).unwrap();
        let axes = [f.tangent1, f.tangent2, f.normal];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((axes[i].dot(&axes[j]) - want).abs() < 1e-12);
            }
        }
        for p in &tri {
            assert!(f.to_local(p).z.abs() < 1e-14);
        }
        assert!((f.tangent1.cross(&f.tangent2) - f.normal).norm() < 1e-14);
    }

    #[test]
    fn frame_rotates_with_triangle() {
        let tri = [
            Vector3::new(0.3, -1.2, 0.5),
            Vector3::new(1.1, 0.4, -0.2),
            Vector3::new(-0.4, 0.9, 1.3),
        ];
        let q = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5)), 0.83);
        let f = build_local_frame(&tri).unwrap();
        let g = build_local_frame(&tri.map(|p| q * p)).unwrap();
        assert!((q * f.origin - g.origin).norm() < 1e-14);
        assert!((q * f.tangent1 - g.tangent1).norm() < 1e-14);
        assert!((q * f.tangent2 - g.tangent2).norm() < 1e-14);
        assert!((q * f.normal - g.normal).norm() < 1e-14);
    }
}
