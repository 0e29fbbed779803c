//! Level-by-level experiment drivers shared by the command-line tool and the
//! acceptance tests.

use std::path::PathBuf;

use nalgebra::Vector3;

use crate::analyze::{
    aligned_eigenfunction_errors, errors_against_exact, geometric_errors, metric_errors, relative_level_errors,
    solution_errors, sphere_spectrum, ConvergenceTable, ExactField, FnField, LinearField, TableRow,
};
use crate::dgcore::{assemble_system, AssemblyOptions, DGSpace, RhsEvaluation};
use crate::error::{Error, Result};
use crate::geometry::{exact_patches, reconstruct_patches, ExactSurface, PatchMap, ReconstructionOptions};
use crate::meshgen::{
    build_initial_mesh, read_off, read_xyz, refine_and_project, sample_sphere_cloud, sample_torus_cloud_with,
    MeshSource, PointCloud, ReferenceMesh,
};
use crate::solve::{solve_eigen_with, solve_source, EigenOptions, EigenResult};

/// Torus used by the synthetic experiments (tube radius 1 around a circle of radius 4).
pub const EXPERIMENT_TORUS: ExactSurface = ExactSurface::Torus { major: 4.0, minor: 1.0 };
/// `(n_theta, n_phi)` lattice of the synthetic sphere cloud.
pub const SPHERE_CLOUD_GRID: (usize, usize) = (1200, 2400);
/// `(n_theta, n_phi)` lattice of the synthetic torus cloud (tube, revolution).
pub const TORUS_CLOUD_GRID: (usize, usize) = (600, 2400);
/// Neighbours used to project refined vertices onto the cloud.
pub const DEFAULT_KNN: usize = 10;

/// Relative gap below which eigenvalues are treated as one multiplicity group.
const MULTIPLICITY_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceChoice {
    Sphere,
    Torus,
    PlaneTest,
    /// Cloud and seed mesh read from files; no exact surface, so only
    /// self-convergence quantities are available.
    Cloud {
        cloud: PathBuf,
        mesh: PathBuf,
    },
}

/// Cloud, seed mesh and (for synthetic surfaces) the exact surface.
pub struct Problem {
    pub surface: Option<ExactSurface>,
    pub cloud: PointCloud,
    pub seed: ReferenceMesh,
}

fn flat_cloud() -> Result<PointCloud> {
    let n = 41;
    let pts = (0..n * n)
        .map(|i| {
            let (a, b) = ((i % n) as f64, (i / n) as f64);
            Vector3::new(-0.25 + 1.5 * a / (n - 1) as f64, -0.25 + 1.5 * b / (n - 1) as f64, 0.0)
        })
        .collect();
    PointCloud::new(pts)
}

impl Problem {
    pub fn new(choice: &SurfaceChoice) -> Result<Self> {
        match choice {
            SurfaceChoice::Sphere => Ok(Self {
                surface: Some(ExactSurface::UnitSphere),
                cloud: sample_sphere_cloud(SPHERE_CLOUD_GRID.0, SPHERE_CLOUD_GRID.1)?,
                seed: build_initial_mesh(MeshSource::Surface(ExactSurface::UnitSphere))?,
            }),
            SurfaceChoice::Torus => {
                let ExactSurface::Torus { major, minor } = EXPERIMENT_TORUS else {
                    unreachable!()
                };
                Ok(Self {
                    surface: Some(EXPERIMENT_TORUS),
                    cloud: sample_torus_cloud_with(major, minor, TORUS_CLOUD_GRID.0, TORUS_CLOUD_GRID.1)?,
                    seed: build_initial_mesh(MeshSource::Surface(EXPERIMENT_TORUS))?,
                })
            }
            SurfaceChoice::PlaneTest => Ok(Self {
                surface: Some(ExactSurface::PlaneZ0),
                cloud: flat_cloud()?,
                seed: build_initial_mesh(MeshSource::Surface(ExactSurface::PlaneZ0))?,
            }),
            SurfaceChoice::Cloud { cloud, mesh } => {
                let cloud = read_xyz(cloud)?;
                let seed = read_off(mesh)?;
                Ok(Self {
                    surface: None,
                    cloud,
                    seed,
                })
            }
        }
    }

    /// `count` meshes: the seed followed by successive refine-and-project steps.
    pub fn levels(&self, count: usize, knn: usize) -> Result<Vec<ReferenceMesh>> {
        let mut out = vec![self.seed.clone()];
        while out.len() < count {
            let next = refine_and_project(out.last().unwrap(), &self.cloud, knn)?;
            out.push(next);
        }
        Ok(out)
    }

    fn exact(&self, what: &str) -> Result<ExactSurface> {
        self.surface
            .ok_or_else(|| Error::InvalidArgument(format!("{what} needs a surface with a known closed form")))
    }
}

/// Settings common to all experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub k: usize,
    pub l: usize,
    pub levels: usize,
    pub knn: usize,
    pub reconstruction: ReconstructionOptions,
    pub assembly: AssemblyOptions,
    pub eigen: EigenOptions,
}

impl ExperimentOptions {
    pub fn new(k: usize, l: usize, levels: usize) -> Self {
        Self {
            k,
            l,
            levels,
            knn: DEFAULT_KNN,
            reconstruction: ReconstructionOptions::default(),
            assembly: AssemblyOptions::for_degree(l),
            eigen: EigenOptions::default(),
        }
    }
}

fn row(level: usize, mesh: &ReferenceMesh, dofs: usize, error: f64) -> TableRow {
    TableRow {
        level,
        n_vertices: mesh.vertices().len(),
        dofs,
        h: mesh.h(),
        error,
    }
}

/// Nodal errors `e_n`, `e_t` and, against the exact-surface patches,
/// Jacobian and metric discrepancies for each level.
pub fn geometry_study(problem: &Problem, opts: &ExperimentOptions) -> Result<Vec<ConvergenceTable>> {
    let surface = problem.exact("geometric error measurement")?;
    let mut tables = ["e_n", "e_t", "jacobian", "metric"].map(ConvergenceTable::new);
    for (level, mesh) in problem.levels(opts.levels, opts.knn)?.iter().enumerate() {
        let patches = reconstruct_patches(mesh, &problem.cloud, opts.k, &opts.reconstruction)?;
        let exact = exact_patches(mesh, &surface, opts.k)?;
        let geo = geometric_errors(&patches, &surface);
        let met = metric_errors(&patches, &exact, 2 * opts.k + 2);
        for (t, e) in tables.iter_mut().zip([geo.e_n, geo.e_t, met.jacobian, met.metric]) {
            t.push(row(level, mesh, 0, e));
        }
    }
    Ok(tables.into())
}

/// Source term of a manufactured problem.
pub type SourceFn = Box<dyn Fn(&Vector3<f64>) -> f64 + Sync>;

/// Manufactured solution and source term `f = -Lap u + u` on a test surface.
pub fn manufactured(surface: &ExactSurface) -> (Box<dyn ExactField>, SourceFn) {
    match *surface {
        ExactSurface::UnitSphere => (
            // x1 x2 is a degree-2 spherical harmonic: -Lap u = 6 u
            Box::new(FnField {
                value: |x: &Vector3<f64>| x.x * x.y,
                gradient: |x: &Vector3<f64>| Vector3::new(x.y, x.x, 0.0),
            }),
            Box::new(|x: &Vector3<f64>| 7.0 * x.x * x.y),
        ),
        ExactSurface::Torus { .. } => {
            // -Lap (a . x) = H (a . nu) with H the sum of principal curvatures
            let a = Vector3::new(1.0, -1.0, 0.0);
            let s = *surface;
            (
                Box::new(LinearField(a)),
                Box::new(move |x: &Vector3<f64>| s.mean_curvature(x) * a.dot(&s.normal(x)) + a.dot(x)),
            )
        }
        ExactSurface::PlaneZ0 => {
            // cos(pi x) cos(pi y) has zero normal derivative on the unit square
            let pi = std::f64::consts::PI;
            (
                Box::new(FnField {
                    value: move |x: &Vector3<f64>| (pi * x.x).cos() * (pi * x.y).cos(),
                    gradient: move |x: &Vector3<f64>| {
                        Vector3::new(
                            -pi * (pi * x.x).sin() * (pi * x.y).cos(),
                            -pi * (pi * x.x).cos() * (pi * x.y).sin(),
                            0.0,
                        )
                    },
                }),
                Box::new(move |x: &Vector3<f64>| (2.0 * pi * pi + 1.0) * (pi * x.x).cos() * (pi * x.y).cos()),
            )
        }
    }
}

/// Discrete space of one level built from the cloud.
pub fn build_space(problem: &Problem, mesh: &ReferenceMesh, opts: &ExperimentOptions) -> Result<DGSpace> {
    let patches: Vec<PatchMap> = reconstruct_patches(mesh, &problem.cloud, opts.k, &opts.reconstruction)?;
    DGSpace::new(mesh.clone(), patches, opts.l)
}

/// Per-level coefficient vector of a source solve, for optional dumps.
pub struct SolvedLevel {
    pub level: usize,
    pub n_vertices: usize,
    pub coefficients: Vec<f64>,
}

/// L^2, broken H^1 and jump errors of the manufactured source problem.
pub fn source_study(problem: &Problem, opts: &ExperimentOptions) -> Result<(Vec<ConvergenceTable>, Vec<SolvedLevel>)> {
    let surface = problem.exact("the manufactured source problem")?;
    let (u, f) = manufactured(&surface);
    let mut tables = ["l2", "h1", "jump"].map(ConvergenceTable::new);
    let mut solved = Vec::new();
    for (level, mesh) in problem.levels(opts.levels, opts.knn)?.iter().enumerate() {
        let space = build_space(problem, mesh, opts)?;
        let sys = assemble_system(
            &space,
            &opts.assembly,
            Some((&f, RhsEvaluation::AtExactClosestPoint(surface))),
        )?;
        let c = solve_source(&sys)?;
        let e = solution_errors(&space, &c, u.as_ref(), &surface, sys.beta, opts.assembly.quad_boost);
        for (t, v) in tables.iter_mut().zip([e.l2, e.h1_semi, e.jump]) {
            t.push(row(level, mesh, space.n_dofs(), v));
        }
        solved.push(SolvedLevel {
            level,
            n_vertices: mesh.vertices().len(),
            coefficients: c,
        });
    }
    Ok((tables.into(), solved))
}

/// One eigenpair row of an eigenvalue study.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EigenRow {
    pub level: usize,
    pub n_vertices: usize,
    pub dofs: usize,
    /// 1-based index, `i = 1` the constant mode.
    pub index: usize,
    pub eigenvalue: f64,
    /// Error against the exact value (sphere) or the previous level (relative).
    pub error: Option<f64>,
    /// Aligned L^2 error of the eigenfunction where the exact one is known.
    pub function_l2: Option<f64>,
    pub order: Option<f64>,
}

fn sphere_harmonic_basis() -> Vec<Box<dyn ExactField>> {
    (0..3)
        .map(|i| Box::new(LinearField(Vector3::ith(i, 1.0))) as Box<dyn ExactField>)
        .collect()
}

/// Smallest `count` eigenpairs of each level and their errors.
///
/// On the sphere errors are against `n (n + 1)`, and the three degree-one
/// eigenfunctions are compared with the span of the coordinate functions. Other
/// surfaces use relative differences between consecutive levels.
pub fn eigen_study(problem: &Problem, opts: &ExperimentOptions, count: usize) -> Result<Vec<EigenRow>> {
    let mut rows: Vec<EigenRow> = Vec::new();
    let mut previous: Option<(Vec<f64>, Vec<Option<f64>>, f64)> = None;
    for (level, mesh) in problem.levels(opts.levels, opts.knn)?.iter().enumerate() {
        let space = build_space(problem, mesh, opts)?;
        let sys = assemble_system::<fn(&Vector3<f64>) -> f64>(&space, &opts.assembly, None)?;
        let res: EigenResult = solve_eigen_with(&sys.a, &sys.m, count, &opts.eigen)?;
        let lambda = res.eigenvalues.clone();
        let (errors, l2): (Vec<Option<f64>>, Vec<Option<f64>>) = match problem.surface {
            Some(ExactSurface::UnitSphere) => {
                let exact = sphere_spectrum(1.0, count);
                let err = errors_against_exact(&lambda, &exact);
                let mut l2 = vec![None; count];
                if count >= 4 {
                    let vecs: Vec<Vec<f64>> = (1..4).map(|i| res.eigenvector(i)).collect();
                    let basis = sphere_harmonic_basis();
                    let refs: Vec<&dyn ExactField> = basis.iter().map(|b| b.as_ref()).collect();
                    let e = aligned_eigenfunction_errors(&space, &vecs, &refs, &ExactSurface::UnitSphere);
                    for (i, v) in e.into_iter().enumerate() {
                        l2[i + 1] = Some(v);
                    }
                }
                (err.into_iter().map(Some).collect(), l2)
            }
            _ => {
                let err = match &previous {
                    Some((prev, _, _)) => relative_level_errors(prev, &lambda, MULTIPLICITY_TOL)?
                        .into_iter()
                        .enumerate()
                        .map(|(i, e)| (i > 0).then_some(e))
                        .collect(),
                    None => vec![None; count],
                };
                (err, vec![None; count])
            }
        };
        let h = mesh.h();
        for i in 0..count {
            let order = previous.as_ref().and_then(|(_, perr, ph)| match (perr[i], errors[i]) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / (ph / h).ln()),
                _ => None,
            });
            rows.push(EigenRow {
                level,
                n_vertices: mesh.vertices().len(),
                dofs: space.n_dofs(),
                index: i + 1,
                eigenvalue: lambda[i],
                error: errors[i],
                function_l2: l2[i],
                order,
            });
        }
        previous = Some((lambda, errors, h));
    }
    Ok(rows)
}
