use std::ops::Range;

use nalgebra::DMatrix;

use super::solution::ExactField;
use crate::dgcore::{DGSpace, QuadratureRule};
use crate::error::{Error, Result};
use crate::geometry::{exact_jet, ExactSurface, MetricSample};

/// Eigenvalues `n (n + 1) / R^2` of the Laplace-Beltrami operator on a
/// sphere of radius `radius`, each repeated `2n + 1` times, smallest first.
pub fn sphere_spectrum(radius: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 0usize;
    while out.len() < count {
        let v = (n * (n + 1)) as f64 / (radius * radius);
        for _ in 0..(2 * n + 1) {
            if out.len() < count {
                out.push(v);
            }
        }
        n += 1;
    }
    out
}

/// Split sorted values into runs whose consecutive relative gaps are below `rel_tol`.
pub fn group_multiplicities(values: &[f64], rel_tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            (b - a).abs() > rel_tol * a.abs().max(b.abs()).max(1e-300)
        };
        if split {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// `|lambda_i - exact_i|` index by index (both sorted ascending).
pub fn errors_against_exact(computed: &[f64], exact: &[f64]) -> Vec<f64> {
    computed.iter().zip(exact).map(|(a, b)| (a - b).abs()).collect()
}

/// Relative self-convergence errors `|fine_i - coarse_i| / fine_i`.
///
/// Both spectra are grouped into multiplicity clusters (relative gap below
/// `rel_tol`); the cluster sizes must agree, otherwise the index matching
/// across levels would be meaningless.
pub fn relative_level_errors(coarse: &[f64], fine: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = coarse.len().min(fine.len());
    let gc = group_multiplicities(&coarse[..n], rel_tol);
    let gf = group_multiplicities(&fine[..n], rel_tol);
    // the last cluster may be cut by the requested count, so only complete clusters are compared
    let sizes = |g: &[Range<usize>]| g.iter().map(|r| r.len()).collect::<Vec<_>>();
    let (sc, sf) = (sizes(&gc), sizes(&gf));
    let complete = sc.len().min(sf.len()).saturating_sub(1);
    if sc[..complete] != sf[..complete] {
        return Err(Error::MultiplicityMismatch(sc, sf));
    }
    Ok((0..n).map(|i| ((fine[i] - coarse[i]) / fine[i]).abs()).collect())
}

/// Broken L^2 inner products `<u_i, f_j>` on the exact surface (pullback of
/// the discrete functions), together with `<u_i, u_i>` and `<f_j, f_j>`.
fn exact_inner_products(
    space: &DGSpace,
    vectors: &[Vec<f64>],
    fields: &[&dyn ExactField],
    surface: &ExactSurface,
) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let rule = QuadratureRule::for_degrees(space.k(), space.l(), 0);
    let (nu, nf) = (vectors.len(), fields.len());
    let mut cross = DMatrix::zeros(nu, nf);
    let mut uu = vec![0.0; nu];
    let mut ff = vec![0.0; nf];
    for (t, p) in space.patches().iter().enumerate() {
        let det = p.reference_jacobian_det();
        for (xi, w) in rule.triangle.points.iter().zip(&rule.triangle.weights) {
            let (x, je) = exact_jet(surface, p.frame(), &p.reference_to_parametric(xi));
            let Ok(me) = MetricSample::from_jacobian(je) else {
                continue;
            };
            let ww = w * det * me.sqrt_det_g;
            let uh: Vec<f64> = vectors.iter().map(|v| space.evaluate(v, t, xi)).collect();
            let fv: Vec<f64> = fields.iter().map(|f| f.value(&x)).collect();
            for i in 0..nu {
                uu[i] += ww * uh[i] * uh[i];
                for j in 0..nf {
                    cross[(i, j)] += ww * uh[i] * fv[j];
                }
            }
            for j in 0..nf {
                ff[j] += ww * fv[j] * fv[j];
            }
        }
    }
    (cross, uu, ff)
}

/// L^2 distances between discrete eigenfunctions of one multiplicity group
/// and the exact eigenspace spanned by `basis`.
///
/// The exact basis is orthonormalized on the surface; the discrete functions
/// are rotated onto it by the orthogonal Procrustes solution, which also
/// fixes signs. Entry `i` is `|u_i - sum_j Q_ij f_j|`.
pub fn aligned_eigenfunction_errors(
    space: &DGSpace,
    vectors: &[Vec<f64>],
    basis: &[&dyn ExactField],
    surface: &ExactSurface,
) -> Vec<f64> {
    let (cross, uu, ff) = exact_inner_products(space, vectors, basis, surface);
    // exact eigenfunctions are assumed mutually orthogonal (true for the harmonic bases used here)
    let scale: Vec<f64> = ff.iter().map(|v| 1.0 / v.sqrt()).collect();
    let c = DMatrix::from_fn(cross.nrows(), cross.ncols(), |i, j| cross[(i, j)] * scale[j]);
    let svd = c.clone().svd(true, true);
    let q = svd.u.unwrap() * svd.v_t.unwrap();
    (0..vectors.len())
        .map(|i| {
            // |u - sum q_ij f_j|^2 = |u|^2 - 2 sum q_ij c_ij + sum q_ij^2
            let qc: f64 = (0..c.ncols()).map(|j| q[(i, j)] * c[(i, j)]).sum();
            let qq: f64 = (0..c.ncols()).map(|j| q[(i, j)].powi(2)).sum();
            (uu[i] - 2.0 * qc + qq).max(0.0).sqrt()
        })
        .collect()
}

/// Eigenvalue gap `n (n + 1) (1 - 1 / (1 + eps)^2)` between the unit sphere
/// and the sphere of radius `1 + eps`.
pub fn inflated_sphere_gap(n: usize, eps: f64) -> f64 {
    (n * (n + 1)) as f64 * (1.0 - 1.0 / (1.0 + eps).powi(2))
}
