use nalgebra::{DMatrix, Vector2};

use super::monomial;

/// Principal-lattice nodes of degree `k` on the reference triangle `(0,0),(1,0),(0,1)`.
///
/// Ordered row by row: `j` (the `eta` index) outer, `i` inner.
pub fn lattice_nodes(k: usize) -> Vec<Vector2<f64>> {
    let mut out = Vec::with_capacity(monomial::dim(k));
    for j in 0..=k {
        for i in 0..=k - j {
            out.push(Vector2::new(i as f64 / k as f64, j as f64 / k as f64));
        }
    }
    out
}

/// Nodal basis on the reference triangle for the degree-`k` principal lattice.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<Vector2<f64>>,
    /// Column `i` holds monomial coefficients of basis function `i`.
    coef: DMatrix<f64>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange degree must be at least 1");
        let nodes = lattice_nodes(degree);
        let n = nodes.len();
        let mut v = DMatrix::zeros(n, n);
        let mut row = vec![0.0; n];
        for (r, p) in nodes.iter().enumerate() {
            monomial::values(degree, p.x, p.y, &mut row);
            for c in 0..n {
                v[(r, c)] = row[c];
            }
        }
        let coef = v.try_inverse().expect("principal lattice is unisolvent");
        Self { degree, nodes, coef }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector2<f64>] {
        &self.nodes
    }

    pub fn values(&self, xi: &Vector2<f64>, out: &mut [f64]) {
        let n = self.len();
        let mut m = [0.0; 64];
        monomial::values(self.degree, xi.x, xi.y, &mut m[..n]);
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|a| m[a] * self.coef[(a, i)]).sum();
        }
    }

    /// Values and reference gradients of every basis function.
    pub fn values_and_gradients(&self, xi: &Vector2<f64>, val: &mut [f64], grad: &mut [Vector2<f64>]) {
        let n = self.len();
        let mut m = [0.0; 64];
        let mut dx = [0.0; 64];
        let mut dy = [0.0; 64];
        monomial::values_and_gradients(self.degree, xi.x, xi.y, &mut m[..n], &mut dx[..n], &mut dy[..n]);
        for i in 0..n {
            let mut v = 0.0;
            let mut g = Vector2::zeros();
            for a in 0..n {
                let c = self.coef[(a, i)];
                v += m[a] * c;
                g.x += dx[a] * c;
                g.y += dy[a] * c;
            }
            val[i] = v;
            grad[i] = g;
        }
    }
}
