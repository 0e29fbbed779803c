use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;

use super::quadrature::QuadratureRule;
use super::space::DGSpace;
use crate::error::Result;
use crate::geometry::{edge_sample, ExactSurface, MetricSample};
use crate::solve::CsrMatrix;

/// How the metric factor enters the jump of the consistency terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpVariant {
    /// `[v l] = v+ l+ - v- l-`. On patches that do not meet along an edge
    /// `l+ != l-`, so constants leave a residual of order `h^k` in the
    /// consistency terms.
    Product,
    /// `[v] {l}`: vanishes on globally continuous functions.
    #[default]
    Averaged,
}

/// Mesh size used in the penalty `beta / h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyScale {
    /// Largest triangle diameter of the mesh.
    #[default]
    Global,
    /// Mean diameter of the two triangles sharing the edge.
    PerEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AssemblyOptions {
    pub beta: f64,
    pub quad_boost: usize,
    pub jump: JumpVariant,
    pub penalty_scale: PenaltyScale,
}

impl AssemblyOptions {
    /// Default penalty `10 (l + 1)^2`.
    pub fn default_beta(l: usize) -> f64 {
        10.0 * ((l + 1) * (l + 1)) as f64
    }

    pub fn for_degree(l: usize) -> Self {
        Self {
            beta: Self::default_beta(l),
            quad_boost: 0,
            jump: JumpVariant::default(),
            penalty_scale: PenaltyScale::default(),
        }
    }
}

/// Where the source term is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsEvaluation {
    /// At the reconstructed patch point.
    AtPatchPoint,
    /// At the exact closest point of the flat parametric point (test surfaces only).
    AtExactClosestPoint(ExactSurface),
}

/// Stiffness-plus-mass matrix, mass matrix and load vector.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub a: CsrMatrix,
    pub m: CsrMatrix,
    pub b: Vec<f64>,
    pub beta: f64,
    pub h: f64,
}

/// Per-quadrature-point data of one cell.
struct CellPoint {
    weight: f64,
    metric: MetricSample,
    values: Vec<f64>,
    grads: Vec<Vector2<f64>>,
}

fn cell_points(space: &DGSpace, t: usize, rule: &QuadratureRule) -> Result<Vec<CellPoint>> {
    let n = space.dofs_per_cell();
    let patch = &space.patches()[t];
    let bt = patch.reference_gradient_map().transpose();
    let det = patch.reference_jacobian_det();
    rule.triangle
        .points
        .iter()
        .zip(&rule.triangle.weights)
        .map(|(xi, w)| {
            let metric = patch.metric_at_reference(xi)?;
            let mut values = vec![0.0; n];
            let mut grads = vec![Vector2::zeros(); n];
            space.basis().values_and_gradients(xi, &mut values, &mut grads);
            for g in grads.iter_mut() {
                *g = bt * *g;
            }
            Ok(CellPoint {
                weight: w * det,
                metric,
                values,
                grads,
            })
        })
        .collect()
}

fn push_block(out: &mut Vec<(usize, usize, f64)>, row0: usize, col0: usize, n: usize, block: &[f64]) {
    for i in 0..n {
        for j in 0..n {
            out.push((row0 + i, col0 + j, block[i * n + j]));
        }
    }
}

fn cell_triplets<F>(space: &DGSpace, rule: &QuadratureRule, kernel: F) -> Result<Vec<(usize, usize, f64)>>
where
    F: Fn(&CellPoint, usize, usize) -> f64 + Sync,
{
    let n = space.dofs_per_cell();
    let per_cell: Vec<Result<Vec<(usize, usize, f64)>>> = (0..space.patches().len())
        .into_par_iter()
        .map(|t| {
            let pts = cell_points(space, t, rule).map_err(|e| e.on_triangle(t))?;
            let mut block = vec![0.0; n * n];
            for p in &pts {
                for i in 0..n {
                    for j in 0..n {
                        block[i * n + j] += kernel(p, i, j);
                    }
                }
            }
            let mut out = Vec::with_capacity(n * n);
            push_block(&mut out, space.offset(t), space.offset(t), n, &block);
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_cell {
        all.extend(r?);
    }
    Ok(all)
}

/// Interior-edge contributions: consistency terms and penalty.
fn edge_triplets(space: &DGSpace, rule: &QuadratureRule, opts: &AssemblyOptions) -> Result<Vec<(usize, usize, f64)>> {
    let n = space.dofs_per_cell();
    let mesh = space.mesh();
    let h_global = mesh.h();
    let per_edge: Vec<Result<Vec<(usize, usize, f64)>>> = (0..mesh.edges().len())
        .into_par_iter()
        .map(|e| {
            let sides = match space.edge_sides(e)? {
                Some(s) => s,
                None => return Ok(Vec::new()),
            };
            let [v0, v1] = mesh.edges()[e].vertices;
            let len = (mesh.vertices()[v1] - mesh.vertices()[v0]).norm();
            let h = match opts.penalty_scale {
                PenaltyScale::Global => h_global,
                PenaltyScale::PerEdge => {
                    let d = |t: usize| crate::geometry::triangle_diameter(&mesh.triangle_points(t));
                    0.5 * (d(sides[0].triangle) + d(sides[1].triangle))
                }
            };
            let pen = opts.beta / h;
            // blocks[s][r]: test functions on side s, trial functions on side r
            let mut blocks = vec![vec![0.0; n * n]; 4];
            let sign = [1.0, -1.0];
            let mut val = [vec![0.0; n], vec![0.0; n]];
            let mut flux = [vec![0.0; n], vec![0.0; n]];
            let mut grad = vec![Vector2::zeros(); n];
            for (t, w) in rule.edge.points.iter().zip(&rule.edge.weights) {
                let mut lg = [0.0; 2];
                for s in 0..2 {
                    let side = sides[s];
                    let patch = &space.patches()[side.triangle];
                    let xi = side.reference_point(*t);
                    let metric = patch
                        .metric_at_reference(&xi)
                        .map_err(|er| er.on_triangle(side.triangle))?;
                    let (a, b) = patch.edge_endpoints(side.local_edge);
                    let es = edge_sample(&metric, &(b - a), patch.reference_to_parametric(&xi));
                    space.basis().values_and_gradients(&xi, &mut val[s], &mut grad);
                    let bt = patch.reference_gradient_map().transpose();
                    for i in 0..n {
                        flux[s][i] = (bt * grad[i]).dot(&es.conormal);
                    }
                    lg[s] = es.l_g;
                }
                let lavg = 0.5 * (lg[0] + lg[1]);
                let lam = match opts.jump {
                    JumpVariant::Product => lg,
                    JumpVariant::Averaged => [lavg, lavg],
                };
                let wq = w * len;
                for s in 0..2 {
                    for r in 0..2 {
                        let blk = &mut blocks[2 * s + r];
                        let ss = sign[s] * sign[r];
                        for i in 0..n {
                            for j in 0..n {
                                let cons =
                                    -0.5 * ss * (flux[r][j] * val[s][i] * lam[s] + flux[s][i] * val[r][j] * lam[r]);
                                let penalty = pen * lavg * ss * val[s][i] * val[r][j];
                                blk[i * n + j] += wq * (cons + penalty);
                            }
                        }
                    }
                }
            }
            let mut out = Vec::with_capacity(4 * n * n);
            for s in 0..2 {
                for r in 0..2 {
                    push_block(
                        &mut out,
                        space.offset(sides[s].triangle),
                        space.offset(sides[r].triangle),
                        n,
                        &blocks[2 * s + r],
                    );
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_edge {
        all.extend(r?);
    }
    Ok(all)
}

/// The symmetric interior-penalty form of `-Laplace_g u + u` on the patches.
pub fn assemble_bilinear(space: &DGSpace, opts: &AssemblyOptions) -> Result<CsrMatrix> {
    let rule = QuadratureRule::for_degrees(space.k(), space.l(), opts.quad_boost);
    let mut t = cell_triplets(space, &rule, |p, i, j| {
        let ginv = p.metric.g_inv();
        p.weight * p.metric.sqrt_det_g * (p.grads[i].dot(&(ginv * p.grads[j])) + p.values[i] * p.values[j])
    })?;
    t.extend(edge_triplets(space, &rule, opts)?);
    Ok(CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), t))
}

/// Mass matrix weighted by the patch area element (block diagonal).
pub fn assemble_mass(space: &DGSpace, quad_boost: usize) -> Result<CsrMatrix> {
    let rule = QuadratureRule::for_degrees(space.k(), space.l(), quad_boost);
    let t = cell_triplets(space, &rule, |p, i, j| {
        p.weight * p.metric.sqrt_det_g * p.values[i] * p.values[j]
    })?;
    Ok(CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), t))
}

/// Load vector `b_i = int f phi_i sqrt|g|`.
pub fn assemble_rhs<F>(space: &DGSpace, f: F, eval: RhsEvaluation, quad_boost: usize) -> Result<Vec<f64>>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let rule = QuadratureRule::for_degrees(space.k(), space.l(), quad_boost);
    let n = space.dofs_per_cell();
    let per_cell: Vec<Result<Vec<f64>>> = (0..space.patches().len())
        .into_par_iter()
        .map(|t| {
            let patch = &space.patches()[t];
            let pts = cell_points(space, t, &rule).map_err(|e| e.on_triangle(t))?;
            let mut b = vec![0.0; n];
            for (p, xi) in pts.iter().zip(&rule.triangle.points) {
                let x = match eval {
                    RhsEvaluation::AtPatchPoint => patch.point_at_reference(xi),
                    RhsEvaluation::AtExactClosestPoint(s) => {
                        s.closest_point(&patch.frame().plane_point(&patch.reference_to_parametric(xi)))
                    }
                };
                let fx = f(&x) * p.weight * p.metric.sqrt_det_g;
                for (bi, v) in b.iter_mut().zip(&p.values[..n]) {
                    *bi += fx * v;
                }
            }
            Ok(b)
        })
        .collect();
    let mut out = Vec::with_capacity(space.n_dofs());
    for r in per_cell {
        out.extend(r?);
    }
    Ok(out)
}

/// `A`, `M` and (if `f` is given) the load vector in one call.
pub fn assemble_system<F>(
    space: &DGSpace,
    opts: &AssemblyOptions,
    f: Option<(F, RhsEvaluation)>,
) -> Result<AssembledSystem>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let a = assemble_bilinear(space, opts)?;
    let m = assemble_mass(space, opts.quad_boost)?;
    let b = match f {
        Some((f, eval)) => assemble_rhs(space, f, eval, opts.quad_boost)?,
        None => vec![0.0; space.n_dofs()],
    };
    Ok(AssembledSystem {
        a,
        m,
        b,
        beta: opts.beta,
        h: space.mesh().h(),
    })
}
