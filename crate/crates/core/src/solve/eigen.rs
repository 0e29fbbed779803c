use faer::Mat;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::source::SpdFactor;
use super::sparse::CsrMatrix;
use crate::dgcore::AssembledSystem;
use crate::error::{Error, Result};

/// Smallest eigenpairs of `A x = (lambda + 1) M x`.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// `lambda_i` in ascending order.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
    /// `|A x - (lambda + 1) M x|` per pair.
    pub residual_norms: Vec<f64>,
}

impl EigenResult {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Problems with fewer dofs use a dense solver.
    pub dense_threshold: usize,
    /// Shift `sigma` of the operator `(A - sigma M)^-1 M`.
    pub shift: f64,
    /// Residual tolerance relative to `|A|_inf`.
    pub tol: f64,
    pub max_restarts: usize,
    /// Krylov steps per restart.
    pub steps: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 3000,
            shift: 0.5,
            tol: 1e-10,
            max_restarts: 60,
            steps: 4,
            seed: 0x5eed,
        }
    }
}

pub fn solve_eigen(system: &AssembledSystem, count: usize) -> Result<EigenResult> {
    solve_eigen_with(&system.a, &system.m, count, &EigenOptions::default())
}

pub fn solve_eigen_with(a: &CsrMatrix, m: &CsrMatrix, count: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = a.nrows();
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!(
            "eigenpair count {count} not in 1..={n}"
        )));
    }
    if n < opts.dense_threshold {
        dense_eigen(a, m, count)
    } else {
        shift_invert_eigen(a, m, count, opts)
    }
}

fn residuals(a: &CsrMatrix, m: &CsrMatrix, mu: &[f64], x: &DMatrix<f64>) -> Vec<f64> {
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let xi: Vec<f64> = x.column(i).iter().copied().collect();
            let ax = a.mul_vec(&xi);
            let mx = m.mul_vec(&xi);
            ax.iter()
                .zip(&mx)
                .map(|(p, q)| (p - mu[i] * q).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Dense generalized symmetric eigensolver (Cholesky reduction of `M`).
pub fn dense_eigen(a: &CsrMatrix, m: &CsrMatrix, count: usize) -> Result<EigenResult> {
    let ad = a.to_dense();
    let md = m.to_dense();
    let l = md.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    let linv = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let mut c = &linv * ad * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let order = &order[..count];
    let mu: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(a.nrows(), count, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut x = linv.transpose() * y;
    normalize_columns(&mut x, m);
    let residual_norms = residuals(a, m, &mu, &x);
    Ok(EigenResult {
        eigenvalues: mu.iter().map(|v| v - 1.0).collect(),
        eigenvectors: x,
        residual_norms,
    })
}

fn mul_block(m: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let cols: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| m.mul_vec(x.column(j).as_slice()))
        .collect();
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| cols[j][i])
}

/// Scale columns to unit M-norm and fix the sign so the largest entry is positive.
fn normalize_columns(x: &mut DMatrix<f64>, m: &CsrMatrix) {
    let mx = mul_block(m, x);
    for j in 0..x.ncols() {
        let nrm = x.column(j).dot(&mx.column(j)).sqrt();
        let imax = x.column(j).iamax();
        let s = if x[(imax, j)] < 0.0 { -1.0 } else { 1.0 };
        let mut c = x.column_mut(j);
        c *= s / nrm;
    }
}

/// M-orthonormalize `w` against the M-orthonormal columns of `basis` and within itself.
/// Returns `None` if the block collapsed numerically.
fn m_orthonormalize(
    w: DMatrix<f64>,
    basis: &DMatrix<f64>,
    mbasis: &DMatrix<f64>,
    m: &CsrMatrix,
) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let mut w = w;
    for _ in 0..2 {
        if basis.ncols() > 0 {
            let c = mbasis.transpose() * &w;
            w -= basis * c;
        }
        // Cholesky QR within the block
        let mw = mul_block(m, &w);
        let mut g = w.transpose() * &mw;
        g = (&g + g.transpose()) * 0.5;
        let chol = g.cholesky()?;
        let rinv = chol.l().transpose().try_inverse()?;
        w *= rinv;
    }
    let mw = mul_block(m, &w);
    Some((w, mw))
}

fn shift_invert_eigen(a: &CsrMatrix, m: &CsrMatrix, count: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = a.nrows();
    let block = (count + 4).max(8).min(n);
    let shifted = a.linear_combination(1.0, m, -opts.shift);
    let factor = SpdFactor::new(&shifted)?;
    let tol = opts.tol * a.norm_inf();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = DMatrix::from_fn(n, block, |_, _| rng.random::<f64>() - 0.5);
    let apply = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let mx = mul_block(m, x);
        let mut rhs = Mat::from_fn(n, x.ncols(), |i, j| mx[(i, j)]);
        factor.solve_in_place(&mut rhs);
        DMatrix::from_fn(n, x.ncols(), |i, j| rhs[(i, j)])
    };
    let mut last_res = f64::INFINITY;
    let mut last_conv = 0;
    for _ in 0..opts.max_restarts {
        let empty = DMatrix::zeros(n, 0);
        let (mut v, mut mv) = m_orthonormalize(start.clone(), &empty, &empty, m).ok_or(Error::SolverStagnation {
            converged: 0,
            wanted: count,
            max_residual: f64::INFINITY,
        })?;
        let mut last = v.clone();
        for _ in 0..opts.steps {
            let w = apply(&last);
            match m_orthonormalize(w, &v, &mv, m) {
                Some((w, mw)) => {
                    v = concat(&v, &w);
                    mv = concat(&mv, &mw);
                    last = w;
                }
                None => break,
            }
        }
        let av = mul_block(a, &v);
        let mut h = v.transpose() * &av;
        h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let keep = block.min(order.len());
        let y = DMatrix::from_fn(v.ncols(), keep, |r, c| eig.eigenvectors[(r, order[c])]);
        let x = &v * &y;
        let mu: Vec<f64> = order[..keep].iter().map(|&i| eig.eigenvalues[i]).collect();
        let ax = &av * &y;
        let mx = &mv * &y;
        let res: Vec<f64> = (0..count)
            .map(|i| (ax.column(i) - mx.column(i) * mu[i]).norm())
            .collect();
        let conv = res.iter().take_while(|&&r| r <= tol).count();
        last_res = res.iter().cloned().fold(0.0, f64::max);
        last_conv = conv;
        if conv == count {
            let mut x = x.columns(0, count).into_owned();
            normalize_columns(&mut x, m);
            let mu = mu[..count].to_vec();
            let residual_norms = residuals(a, m, &mu, &x);
            return Ok(EigenResult {
                eigenvalues: mu.iter().map(|v| v - 1.0).collect(),
                eigenvectors: x,
                residual_norms,
            });
        }
        start = x;
    }
    Err(Error::SolverStagnation {
        converged: last_conv,
        wanted: count,
        max_residual: last_res,
    })
}

fn concat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Rayleigh quotient `x^T A x / x^T M x`.
pub fn rayleigh_quotient(a: &CsrMatrix, m: &CsrMatrix, x: &[f64]) -> f64 {
    a.bilinear(x, x) / m.bilinear(x, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> (CsrMatrix, CsrMatrix) {
        let mut t = Vec::new();
        let mut tm = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.01));
            tm.push((i, i, 1.0 + 0.1 * (i % 3) as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        (CsrMatrix::from_triplets(n, n, t), CsrMatrix::from_triplets(n, n, tm))
    }

    #[test]
    fn a_equals_twice_m() {
        let (_, m) = laplacian_1d(30);
        let a = m.linear_combination(2.0, &m, 0.0);
        let r = dense_eigen(&a, &m, 5).unwrap();
        for l in &r.eigenvalues {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iterative_matches_dense() {
        let (a, m) = laplacian_1d(400);
        let a = a.linear_combination(1000.0, &m, 1.0);
        let d = dense_eigen(&a, &m, 6).unwrap();
        let opts = EigenOptions {
            dense_threshold: 0,
            ..Default::default()
        };
        let s = solve_eigen_with(&a, &m, 6, &opts).unwrap();
        for (x, y) in d.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!(((x - y) / (1.0 + x.abs())).abs() < 1e-9, "{x} {y}");
        }
        for i in 0..6 {
            let x = s.eigenvector(i);
            assert!((m.bilinear(&x, &x) - 1.0).abs() < 1e-10);
            assert!((rayleigh_quotient(&a, &m, &x) - (s.eigenvalues[i] + 1.0)).abs() < 1e-9);
        }
    }
}
