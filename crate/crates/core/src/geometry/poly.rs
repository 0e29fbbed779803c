use nalgebra::{DMatrix, DVector, Matrix2, Vector2, Vector3};

use super::frame::LocalFrame;
use super::monomial;
use crate::error::{Error, Result};
use crate::meshgen::PointCloud;

/// How cloud points are chosen for a local polynomial fit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointSelection {
    /// The `m` cloud points nearest to the frame origin.
    Nearest,
    /// Farthest-point thinning, in the frame plane, of the cloud points within
    /// `radius_factor * scale` of the origin, seeded with the nearest point.
    Spread { radius_factor: f64 },
    /// Farthest-point thinning of the cloud points whose frame-plane projection
    /// falls in the triangle scaled by `enlarge` about its barycenter.
    Footprint { enlarge: f64 },
    /// `Spread { radius_factor: 0.65 }` for degree-1 fits, `Footprint { enlarge: 1.3 }` otherwise.
    Auto,
}

impl PointSelection {
    /// The concrete rule used for a fit of the given degree.
    pub fn resolve(self, degree: usize) -> Self {
        match self {
            PointSelection::Auto if degree <= 1 => PointSelection::Spread { radius_factor: 0.65 },
            PointSelection::Auto => PointSelection::Footprint { enlarge: 1.3 },
            s => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitOptions {
    /// Number of fitting points; `None` means twice the interpolation count.
    pub points: Option<usize>,
    /// Upper bound on the conditioning of the scaled normal equations.
    pub condition_bound: f64,
    pub selection: PointSelection,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            points: None,
            condition_bound: 1e10,
            selection: PointSelection::Auto,
        }
    }
}

impl FitOptions {
    pub fn point_count(&self, degree: usize) -> usize {
        self.points.unwrap_or(2 * monomial::dim(degree))
    }
}

/// Local height function `v = p(s1, s2)` over a triangle's frame plane.
///
/// Coefficients are held in the variables `s / scale` (scale = triangle
/// diameter) so that every column of the fitting system is O(1).
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPolynomial {
    degree: usize,
    scale: f64,
    scaled: Vec<f64>,
    condition_estimate: f64,
}

impl FittedPolynomial {
    /// Polynomial from coefficients in unscaled monomials `s1^i s2^j` (graded lex).
    pub fn from_coefficients(degree: usize, coefficients: &[f64]) -> Self {
        assert_eq!(coefficients.len(), monomial::dim(degree));
        Self {
            degree,
            scale: 1.0,
            scaled: coefficients.to_vec(),
            condition_estimate: 1.0,
        }
    }

    pub fn zero(degree: usize) -> Self {
        Self::from_coefficients(degree, &vec![0.0; monomial::dim(degree)])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Coefficients in unscaled monomials, graded lexicographic order.
    pub fn coefficients(&self) -> Vec<f64> {
        monomial::exponents(self.degree)
            .iter()
            .zip(&self.scaled)
            .map(|(&(i, j), c)| c / self.scale.powi((i + j) as i32))
            .collect()
    }

    pub fn value(&self, s: &Vector2<f64>) -> f64 {
        let n = self.scaled.len();
        let mut m = [0.0; 64];
        monomial::values(self.degree, s.x / self.scale, s.y / self.scale, &mut m[..n]);
        m[..n].iter().zip(&self.scaled).map(|(a, b)| a * b).sum()
    }

    /// Value, gradient and Hessian at `s`.
    pub fn jet(&self, s: &Vector2<f64>) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let n = self.scaled.len();
        let (x, y) = (s.x / self.scale, s.y / self.scale);
        let mut v = [0.0; 64];
        let mut dx = [0.0; 64];
        let mut dy = [0.0; 64];
        let mut hxx = [0.0; 64];
        let mut hxy = [0.0; 64];
        let mut hyy = [0.0; 64];
        monomial::values_and_gradients(self.degree, x, y, &mut v[..n], &mut dx[..n], &mut dy[..n]);
        monomial::hessians(self.degree, x, y, &mut hxx[..n], &mut hxy[..n], &mut hyy[..n]);
        let dot = |a: &[f64]| -> f64 { a[..n].iter().zip(&self.scaled).map(|(a, b)| a * b).sum() };
        let inv = 1.0 / self.scale;
        let grad = Vector2::new(dot(&dx), dot(&dy)) * inv;
        let (h11, h12, h22) = (dot(&hxx), dot(&hxy), dot(&hyy));
        let hess = Matrix2::new(h11, h12, h12, h22) * (inv * inv);
        (dot(&v), grad, hess)
    }
}

/// Greedy farthest-point subset (in the frame plane) of `pool`, seeded with its first entry.
fn thin(cloud: &PointCloud, frame: &LocalFrame, pool: &[usize], m: usize) -> Vec<usize> {
    let planar: Vec<Vector2<f64>> = pool.iter().map(|&i| frame.to_local(&cloud.points()[i]).xy()).collect();
    let mut chosen = vec![0usize];
    let mut dist: Vec<f64> = planar.iter().map(|p| (p - planar[0]).norm_squared()).collect();
    while chosen.len() < m.min(pool.len()) {
        let best = (1..planar.len()).fold(0, |b, i| if dist[i] > dist[b] { i } else { b });
        chosen.push(best);
        for (d, p) in dist.iter_mut().zip(&planar) {
            *d = d.min((p - planar[best]).norm_squared());
        }
    }
    chosen.iter().map(|&i| pool[i]).collect()
}

fn select_points(
    cloud: &PointCloud,
    frame: &LocalFrame,
    triangle: &[Vector2<f64>; 3],
    scale: f64,
    m: usize,
    selection: PointSelection,
) -> Vec<usize> {
    // pools are ordered by distance, so thinning is seeded with the point nearest the origin
    let fallback = || cloud.knn(&frame.origin, 4 * m);
    match selection {
        PointSelection::Auto => unreachable!("resolved by the caller"),
        PointSelection::Nearest => cloud.knn(&frame.origin, m),
        PointSelection::Spread { radius_factor } => {
            let mut pool = cloud.within_radius(&frame.origin, radius_factor * scale);
            if pool.len() < 4 * m {
                pool = fallback();
            }
            thin(cloud, frame, &pool, m)
        }
        PointSelection::Footprint { enlarge } => {
            let big = triangle.map(|v| v * enlarge);
            let reach = big.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let inside = |q: Vector2<f64>| {
                (0..3).all(|i| {
                    let (a, b) = (big[i], big[(i + 1) % 3]);
                    let e = b - a;
                    e.x * (q.y - a.y) - e.y * (q.x - a.x) >= 0.0
                })
            };
            let mut pool: Vec<usize> = cloud
                .within_radius(&frame.origin, reach)
                .into_iter()
                .filter(|&i| inside(frame.to_local(&cloud.points()[i]).xy()))
                .collect();
            if pool.len() < 2 * m {
                pool = fallback();
            }
            thin(cloud, frame, &pool, m)
        }
    }
}

/// Least-squares degree-`k` height function of nearby cloud points over the
/// frame plane of a triangle given by its parametric (frame) coordinates.
pub fn fit_patch_polynomial(
    cloud: &PointCloud,
    frame: &LocalFrame,
    triangle: &[Vector2<f64>; 3],
    degree: usize,
    options: &FitOptions,
) -> Result<FittedPolynomial> {
    let scale = (0..3)
        .map(|i| (triangle[i] - triangle[(i + 1) % 3]).norm())
        .fold(0.0, f64::max);
    let n = monomial::dim(degree);
    let m = options.point_count(degree);
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least {n} points for degree {degree}, got {m}"
        )));
    }
    if cloud.len() < m {
        return Err(Error::InsufficientPoints {
            needed: m,
            available: cloud.len(),
        });
    }
    let idx = select_points(cloud, frame, triangle, scale, m, options.selection.resolve(degree));
    let local: Vec<Vector3<f64>> = idx.iter().map(|&i| frame.to_local(&cloud.points()[i])).collect();
    fit_local_samples(&local, scale, degree, options.condition_bound)
}

/// Least-squares fit of samples already expressed in frame coordinates.
pub fn fit_local_samples(
    local: &[Vector3<f64>],
    scale: f64,
    degree: usize,
    condition_bound: f64,
) -> Result<FittedPolynomial> {
    let n = monomial::dim(degree);
    let m = local.len();
    if m < n {
        return Err(Error::InsufficientPoints {
            needed: n,
            available: m,
        });
    }
    let mut vander = DMatrix::<f64>::zeros(m, n);
    let mut rhs = DVector::<f64>::zeros(m);
    let mut row = vec![0.0; n];
    for (r, p) in local.iter().enumerate() {
        monomial::values(degree, p.x / scale, p.y / scale, &mut row);
        for c in 0..n {
            vander[(r, c)] = row[c];
        }
        rhs[r] = p.z;
    }
    let sv = vander.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        (smax / smin).powi(2)
    } else {
        f64::INFINITY
    };
    if !(condition <= condition_bound) {
        return Err(Error::RankDeficientFit {
            condition,
            bound: condition_bound,
        });
    }
    let qr = vander.qr();
    let qtb = qr.q().transpose() * rhs;
    let coef = qr.r().solve_upper_triangular(&qtb).ok_or(Error::RankDeficientFit {
        condition: f64::INFINITY,
        bound: condition_bound,
    })?;
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::RankDeficientFit {
            condition: f64::INFINITY,
            bound: condition_bound,
        });
    }
    Ok(FittedPolynomial {
        degree,
        scale,
        scaled: coef.iter().copied().collect(),
        condition_estimate: condition,
    })
}
