use std::f64::consts::PI;

use nalgebra::Vector2;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `P_n(z)` and its derivative.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Quadrature on the reference triangle `(0,0), (1,0), (0,1)` (weights sum to 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<Vector2<f64>>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        let n = (degree + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for a in 0..n {
            let u = 0.5 * (x[a] + 1.0);
            for b in 0..n {
                let v = 0.5 * (x[b] + 1.0);
                points.push(Vector2::new(u, v * (1.0 - u)));
                weights.push(0.25 * w[a] * w[b] * (1.0 - u));
            }
        }
        Self {
            degree,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss rule on `[0, 1]` (weights sum to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn with_points(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rules sized for geometric degree `k` and function degree `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub triangle: TriangleRule,
    pub edge: EdgeRule,
}

impl QuadratureRule {
    /// Triangle exactness `2l + 2k + 1 + boost`, `ceil((2l + 2k + 1) / 2) + 1 + ceil(boost / 2)` edge points.
    ///
    /// The polynomial part of the integrands has degree `2l + 2k`; the extra
    /// degree and the extra edge point absorb the non-polynomial metric factors
    /// on coarse curved patches, keeping matrix entries stable under doubling
    /// to 1e-10.
    pub fn for_degrees(k: usize, l: usize, boost: usize) -> Self {
        Self {
            triangle: TriangleRule::with_degree(2 * l + 2 * k + 1 + boost),
            edge: EdgeRule::with_points((2 * l + 2 * k + 1).div_ceil(2) + 1 + boost.div_ceil(2)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|x| x as f64).product()
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 0 { 2.0 / (p + 1) as f64 } else { 0.0 };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        for d in 0..=16 {
            let r = TriangleRule::with_degree(d);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p.x.powi(a as i32) * p.y.powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-13, "d={d} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn edge_rule_sums_to_one() {
        let r = EdgeRule::with_points(5);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
