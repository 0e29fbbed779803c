use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

/// Closed surfaces (and one flat test surface) with analytic closest-point maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSurface {
    UnitSphere,
    /// Torus of revolution about the z axis:
    /// `((R + r cos t) cos f, (R + r cos t) sin f, r sin t)`.
    Torus {
        major: f64,
        minor: f64,
    },
    /// The plane `z = 0`.
    PlaneZ0,
}

impl ExactSurface {
    /// Point of the surface nearest to `x`.
    ///
    /// The torus map uses the two-stage projection (center circle, then tube)
    /// and is undefined on the z axis.
    pub fn closest_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        match *self {
            ExactSurface::UnitSphere => x / x.norm(),
            ExactSurface::PlaneZ0 => Vector3::new(x.x, x.y, 0.0),
            ExactSurface::Torus { major, minor } => {
                let c = center_circle_point(major, x);
                let w = x - c;
                c + w * (minor / w.norm())
            }
        }
    }

    /// Jacobian of the closest-point map at `x`.
    pub fn closest_point_jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        match *self {
            ExactSurface::UnitSphere => {
                let r = x.norm();
                let u = x / r;
                (Matrix3::identity() - u * u.transpose()) / r
            }
            ExactSurface::PlaneZ0 => Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)),
            ExactSurface::Torus { major, minor } => {
                let rho = x.xy().norm();
                let q = Vector3::new(x.x / rho, x.y / rho, 0.0);
                let pxy = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0));
                let dc = (pxy - q * q.transpose()) * (major / rho);
                let c = q * major;
                let w = x - c;
                let wn = w.norm();
                let wh = w / wn;
                dc + (Matrix3::identity() - wh * wh.transpose()) * (minor / wn) * (Matrix3::identity() - dc)
            }
        }
    }

    /// Unit outward normal at a surface point `p`.
    pub fn normal(&self, p: &Vector3<f64>) -> Vector3<f64> {
        match *self {
            ExactSurface::UnitSphere => p.normalize(),
            ExactSurface::PlaneZ0 => Vector3::z(),
            ExactSurface::Torus { major, .. } => (p - center_circle_point(major, p)).normalize(),
        }
    }

    /// Sum of principal curvatures at a surface point, positive for the sphere
    /// with outward normal; `-Laplace(a . x) = H (a . n)` for any fixed vector `a`.
    pub fn mean_curvature(&self, p: &Vector3<f64>) -> f64 {
        match *self {
            ExactSurface::UnitSphere => 2.0,
            ExactSurface::PlaneZ0 => 0.0,
            ExactSurface::Torus { major, minor } => {
                let rho = p.xy().norm();
                1.0 / minor + (rho - major) / (minor * rho)
            }
        }
    }

    /// Signed residual of the implicit equation (zero on the surface).
    pub fn implicit_residual(&self, p: &Vector3<f64>) -> f64 {
        match *self {
            ExactSurface::UnitSphere => p.norm() - 1.0,
            ExactSurface::PlaneZ0 => p.z,
            ExactSurface::Torus { major, minor } => {
                let d = p.xy().norm() - major;
                d * d + p.z * p.z - minor * minor
            }
        }
    }

    /// Tangential projection of an ambient vector at surface point `p`.
    pub fn tangential(&self, p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        let n = self.normal(p);
        v - n * n.dot(v)
    }

    pub fn area(&self) -> Option<f64> {
        match *self {
            ExactSurface::UnitSphere => Some(4.0 * PI),
            ExactSurface::PlaneZ0 => None,
            ExactSurface::Torus { major, minor } => Some(4.0 * PI * PI * major * minor),
        }
    }

    pub fn euler_characteristic(&self) -> Option<i64> {
        match self {
            ExactSurface::UnitSphere => Some(2),
            ExactSurface::Torus { .. } => Some(0),
            ExactSurface::PlaneZ0 => None,
        }
    }

    /// Torus point at tube angle `theta` and revolution angle `phi`.
    pub fn torus_point(major: f64, minor: f64, theta: f64, phi: f64) -> Vector3<f64> {
        let rho = major + minor * theta.cos();
        Vector3::new(rho * phi.cos(), rho * phi.sin(), minor * theta.sin())
    }
}

fn center_circle_point(major: f64, x: &Vector3<f64>) -> Vector3<f64> {
    let rho = x.xy().norm();
    Vector3::new(x.x, x.y, 0.0) * (major / rho)
}
