use nalgebra::{DMatrix, Vector2};

use crate::geometry::{lattice_nodes, monomial};

/// Jacobi polynomials `P_n^(alpha, 0)(w)` and derivatives for `n <= nmax`.
fn jacobi(nmax: usize, alpha: f64, w: f64, p: &mut [f64], dp: &mut [f64]) {
    p[0] = 1.0;
    dp[0] = 0.0;
    if nmax == 0 {
        return;
    }
    p[1] = 0.5 * ((alpha + 2.0) * w + alpha);
    dp[1] = 0.5 * (alpha + 2.0);
    for n in 2..=nmax {
        let nf = n as f64;
        let c = 2.0 * nf + alpha;
        let a0 = 2.0 * nf * (nf + alpha) * (c - 2.0);
        let a1 = (c - 1.0) * c * (c - 2.0);
        let a2 = (c - 1.0) * alpha * alpha;
        let a3 = 2.0 * (nf + alpha - 1.0) * (nf - 1.0) * c;
        p[n] = ((a1 * w + a2) * p[n - 1] - a3 * p[n - 2]) / a0;
        dp[n] = (a1 * p[n - 1] + (a1 * w + a2) * dp[n - 1] - a3 * dp[n - 2]) / a0;
    }
}

/// Modal basis of degree-`l` polynomials, orthonormal in `L^2` of the
/// reference triangle, with a nodal adapter for interpolation.
///
/// Functions are the collapsed-coordinate products
/// `(1-y)^p P_p((2x+y-1)/(1-y)) P_q^(2p+1,0)(2y-1)`, ordered by total degree.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    degree: usize,
    /// `(p, q)` index pairs.
    index: Vec<(usize, usize)>,
    norm: Vec<f64>,
    /// Maps values at the principal-lattice nodes to modal coefficients.
    nodal_to_modal: DMatrix<f64>,
}

impl OrthonormalBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "function degree must be at least 1");
        let index: Vec<(usize, usize)> = (0..=degree)
            .flat_map(|d| (0..=d).rev().map(move |p| (p, d - p)))
            .collect();
        // squared L^2 norm over the reference triangle is 1 / ((2p+1)(2p+2q+2))
        let norm = index
            .iter()
            .map(|&(p, q)| (((2 * p + 1) * (2 * p + 2 * q + 2)) as f64).sqrt())
            .collect();
        let mut b = Self {
            degree,
            index,
            norm,
            nodal_to_modal: DMatrix::zeros(0, 0),
        };
        let nodes = lattice_nodes(degree);
        let n = b.len();
        let mut v = DMatrix::zeros(n, n);
        let mut row = vec![0.0; n];
        for (r, p) in nodes.iter().enumerate() {
            b.values(p, &mut row);
            for c in 0..n {
                v[(r, c)] = row[c];
            }
        }
        b.nodal_to_modal = v.try_inverse().expect("principal lattice is unisolvent");
        b
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        monomial::dim(self.degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodal_to_modal(&self) -> &DMatrix<f64> {
        &self.nodal_to_modal
    }

    pub fn values(&self, xi: &Vector2<f64>, out: &mut [f64]) {
        let mut grad = [Vector2::zeros(); 64];
        self.values_and_gradients(xi, out, &mut grad[..self.len()]);
    }

    /// Values and reference-coordinate gradients.
    pub fn values_and_gradients(&self, xi: &Vector2<f64>, val: &mut [f64], grad: &mut [Vector2<f64>]) {
        let l = self.degree;
        let (x, y) = (xi.x, xi.y);
        // Q_p = t^p P_p(z / t) with t = 1 - y, z = 2x + y - 1, by the Legendre recurrence
        let (z, t) = (2.0 * x + y - 1.0, 1.0 - y);
        let mut q = [0.0; 16];
        let mut qx = [0.0; 16];
        let mut qy = [0.0; 16];
        q[0] = 1.0;
        if l >= 1 {
            q[1] = z;
            qx[1] = 2.0;
            qy[1] = 1.0;
        }
        for p in 1..l {
            let pf = p as f64;
            let (a, c) = ((2.0 * pf + 1.0) / (pf + 1.0), pf / (pf + 1.0));
            q[p + 1] = a * z * q[p] - c * t * t * q[p - 1];
            qx[p + 1] = a * (2.0 * q[p] + z * qx[p]) - c * t * t * qx[p - 1];
            qy[p + 1] = a * (q[p] + z * qy[p]) - c * (t * t * qy[p - 1] - 2.0 * t * q[p - 1]);
        }
        let mut jp = [0.0; 16];
        let mut djp = [0.0; 16];
        let mut last = usize::MAX;
        for (i, &(p, qd)) in self.index.iter().enumerate() {
            if p != last {
                jacobi(l - p, (2 * p + 1) as f64, 2.0 * y - 1.0, &mut jp, &mut djp);
                last = p;
            }
            let s = self.norm[i];
            val[i] = s * q[p] * jp[qd];
            grad[i] = Vector2::new(s * qx[p] * jp[qd], s * (qy[p] * jp[qd] + 2.0 * q[p] * djp[qd]));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgcore::quadrature::TriangleRule;

    #[test]
    fn basis_is_orthonormal() {
        for l in 1..=5 {
            let b = OrthonormalBasis::new(l);
            let n = b.len();
            let q = TriangleRule::with_degree(2 * l);
            let mut mass = DMatrix::<f64>::zeros(n, n);
            let mut v = vec![0.0; n];
            for (p, w) in q.points.iter().zip(&q.weights) {
                b.values(p, &mut v);
                for i in 0..n {
                    for j in 0..n {
                        mass[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            let d = (mass - DMatrix::identity(n, n)).amax();
            assert!(d < 1e-11, "l={l} {d}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = OrthonormalBasis::new(4);
        let n = b.len();
        let (mut v, mut g) = (vec![0.0; n], vec![Vector2::zeros(); n]);
        let (mut vp, mut vm) = (vec![0.0; n], vec![0.0; n]);
        let p = Vector2::new(0.23, 0.61);
        b.values_and_gradients(&p, &mut v, &mut g);
        let eps = 1e-6;
        for (d, e) in [Vector2::new(eps, 0.0), Vector2::new(0.0, eps)].iter().enumerate() {
            b.values(&(p + e), &mut vp);
            b.values(&(p - e), &mut vm);
            for i in 0..n {
                let fd = (vp[i] - vm[i]) / (2.0 * eps);
                assert!((fd - g[i][d]).abs() < 1e-6 * (1.0 + fd.abs()), "i={i} d={d}");
            }
        }
    }

    #[test]
    fn nodal_adapter_reproduces_polynomials() {
        let b = OrthonormalBasis::new(3);
        let f = |x: f64, y: f64| 1.0 - 2.0 * x + x * y * y + 0.5 * y * y * y;
        let nodes = lattice_nodes(3);
        let vals = nalgebra::DVector::from_iterator(nodes.len(), nodes.iter().map(|p| f(p.x, p.y)));
        let c = b.nodal_to_modal() * vals;
        let mut v = vec![0.0; b.len()];
        let p = Vector2::new(0.17, 0.41);
        b.values(&p, &mut v);
        let u: f64 = v.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
        assert!((u - f(p.x, p.y)).abs() < 1e-12);
    }
}
