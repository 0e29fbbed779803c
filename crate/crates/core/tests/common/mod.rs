//! Property checks shared by the integration and acceptance tests. Each
//! returns the measured quantity so callers can both assert and report it.

#![allow(dead_code)]

use nalgebra::{Rotation3, Vector3};
use pcdg::analyze::{geometric_errors, metric_errors, solution_errors, FnField};
use pcdg::cli::pipeline::manufactured;
use pcdg::dgcore::{assemble_system, AssemblyOptions, DGSpace, RhsEvaluation};
use pcdg::geometry::{exact_patches, reconstruct_patches, ExactSurface, PatchMap, ReconstructionOptions};
use pcdg::meshgen::{
    build_initial_mesh, refine_and_project, sample_sphere_cloud, sample_torus_cloud_with, MeshSource, PointCloud,
    ReferenceMesh,
};
use pcdg::solve::{dense_eigen, solve_eigen_with, solve_source, EigenOptions};

/// Eigen settings that never fall back to the dense solver.
pub const ITERATIVE: EigenOptions = EigenOptions {
    dense_threshold: 0,
    shift: 0.5,
    tol: 1e-10,
    max_restarts: 60,
    steps: 4,
    seed: 0x5eed,
};

pub const TORUS: ExactSurface = pcdg::cli::pipeline::EXPERIMENT_TORUS;

/// A small test case: surface, cloud and one reference mesh.
pub struct Case {
    pub name: String,
    pub surface: ExactSurface,
    pub cloud: PointCloud,
    pub mesh: ReferenceMesh,
}

pub fn sphere_cloud() -> PointCloud {
    sample_sphere_cloud(400, 800).unwrap()
}

pub fn torus_cloud() -> PointCloud {
    let ExactSurface::Torus { major, minor } = TORUS else {
        unreachable!()
    };
    sample_torus_cloud_with(major, minor, 300, 1200).unwrap()
}

/// Seed meshes of the sphere and the torus, and the first sphere refinement.
pub fn small_cases() -> Vec<Case> {
    let sphere = sphere_cloud();
    let torus = torus_cloud();
    let s0 = build_initial_mesh(MeshSource::Surface(ExactSurface::UnitSphere)).unwrap();
    let s1 = refine_and_project(&s0, &sphere, 10).unwrap();
    let t0 = build_initial_mesh(MeshSource::Surface(TORUS)).unwrap();
    vec![
        Case {
            name: "sphere seed".into(),
            surface: ExactSurface::UnitSphere,
            cloud: sphere.clone(),
            mesh: s0,
        },
        Case {
            name: "sphere level 1".into(),
            surface: ExactSurface::UnitSphere,
            cloud: sphere,
            mesh: s1,
        },
        Case {
            name: "torus seed".into(),
            surface: TORUS,
            cloud: torus,
            mesh: t0,
        },
    ]
}

pub fn space(case: &Case, k: usize, l: usize) -> DGSpace {
    let patches = reconstruct_patches(&case.mesh, &case.cloud, k, &ReconstructionOptions::default()).unwrap();
    DGSpace::new(case.mesh.clone(), patches, l).unwrap()
}

/// Smallest eigenvalue of the metric over all quadrature points of all patches.
pub fn min_metric_eigenvalue(patches: &[PatchMap], rule_degree: usize) -> f64 {
    let rule = pcdg::dgcore::TriangleRule::with_degree(rule_degree);
    let mut lo = f64::INFINITY;
    for p in patches {
        for xi in &rule.points {
            let m = p.metric_at_reference(xi).unwrap();
            assert!((m.g[(0, 1)] - m.g[(1, 0)]).abs() <= 1e-14 * m.g.norm());
            lo = lo.min(m.g.symmetric_eigenvalues().min());
        }
    }
    lo
}

/// `|A - A^T|_max / |A|_max`.
pub fn symmetry_defect(space: &DGSpace) -> f64 {
    let a = pcdg::dgcore::assemble_bilinear(space, &AssemblyOptions::for_degree(space.l())).unwrap();
    a.symmetry_defect() / a.max_abs()
}

/// Smallest eigenvalue of the dense stiffness-plus-mass matrix at penalty `beta`.
pub fn min_eigenvalue(space: &DGSpace, beta: f64) -> f64 {
    let opts = AssemblyOptions {
        beta,
        ..AssemblyOptions::for_degree(space.l())
    };
    let a = pcdg::dgcore::assemble_bilinear(space, &opts).unwrap().to_dense();
    a.symmetric_eigenvalues().min()
}

/// `(|lambda_1|, 1 - |cos|)` with the cosine between the first eigenvector and
/// the interpolated constant in the mass inner product.
pub fn constant_mode(space: &DGSpace) -> (f64, f64) {
    let sys =
        assemble_system::<fn(&Vector3<f64>) -> f64>(space, &AssemblyOptions::for_degree(space.l()), None).unwrap();
    let r = solve_eigen_with(&sys.a, &sys.m, 2, &ITERATIVE).unwrap();
    let x = r.eigenvector(0);
    let c = space.interpolate(|_| 1.0);
    let (xc, xx, cc) = (sys.m.bilinear(&x, &c), sys.m.bilinear(&x, &x), sys.m.bilinear(&c, &c));
    (r.eigenvalues[0].abs(), 1.0 - xc.abs() / (xx * cc).sqrt())
}

/// Largest relative eigenvalue difference between the iterative and dense solvers.
pub fn iterative_vs_dense(space: &DGSpace, count: usize) -> f64 {
    let sys =
        assemble_system::<fn(&Vector3<f64>) -> f64>(space, &AssemblyOptions::for_degree(space.l()), None).unwrap();
    let dense = dense_eigen(&sys.a, &sys.m, count).unwrap();
    let iter = solve_eigen_with(&sys.a, &sys.m, count, &ITERATIVE).unwrap();
    dense
        .eigenvalues
        .iter()
        .zip(&iter.eigenvalues)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Every error the tools report for one mesh: `e_n`, `e_t`, Jacobian, metric,
/// source L^2, H^1 and jump errors, then eigenvalues 2..=count.
pub fn reported_quantities(
    cloud: &PointCloud,
    mesh: &ReferenceMesh,
    surface: ExactSurface,
    rotation: Rotation3<f64>,
    k: usize,
    l: usize,
    quad_boost: usize,
) -> Vec<f64> {
    let patches = reconstruct_patches(mesh, cloud, k, &ReconstructionOptions::default()).unwrap();
    let exact = exact_patches(mesh, &surface, k).unwrap();
    let geo = geometric_errors(&patches, &surface);
    let met = metric_errors(&patches, &exact, 2 * k + 2);
    let space = DGSpace::new(mesh.clone(), patches, l).unwrap();
    // the manufactured pair in the rotated frame: u_R(x) = u(R^T x)
    let (u, f) = manufactured(&surface);
    let inv = rotation.inverse();
    let ur = FnField {
        value: |x: &Vector3<f64>| u.value(&(inv * x)),
        gradient: |x: &Vector3<f64>| rotation * u.gradient(&(inv * x)),
    };
    let fr = |x: &Vector3<f64>| f(&(inv * x));
    let opts = AssemblyOptions {
        quad_boost,
        ..AssemblyOptions::for_degree(l)
    };
    let sys = assemble_system(&space, &opts, Some((&fr, RhsEvaluation::AtExactClosestPoint(surface)))).unwrap();
    let c = solve_source(&sys).unwrap();
    let e = solution_errors(&space, &c, &ur, &surface, sys.beta, quad_boost);
    let eig = solve_eigen_with(&sys.a, &sys.m, 6, &ITERATIVE).unwrap();
    let mut out = vec![geo.e_n, geo.e_t, met.jacobian, met.metric, e.l2, e.h1_semi, e.jump];
    out.extend_from_slice(&eig.eigenvalues[1..]);
    out
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
        .fold(0.0, f64::max)
}

/// Largest relative change of the reported quantities when cloud and mesh
/// are rotated rigidly about the origin (the surfaces' symmetry centre).
pub fn rotation_change(case: &Case, k: usize, l: usize) -> f64 {
    let r = Rotation3::from_euler_angles(0.3, -0.7, 1.1);
    // the torus is only invariant about its axis
    let r = if matches!(case.surface, ExactSurface::Torus { .. }) {
        Rotation3::from_axis_angle(&Vector3::z_axis(), 0.7)
    } else {
        r
    };
    let base = reported_quantities(&case.cloud, &case.mesh, case.surface, Rotation3::identity(), k, l, 0);
    let cloud = PointCloud::new(case.cloud.points().iter().map(|p| r * p).collect()).unwrap();
    let mesh = case
        .mesh
        .with_vertices(case.mesh.vertices().iter().map(|p| r * p).collect());
    let rotated = reported_quantities(&cloud, &mesh, case.surface, r, k, l, 0);
    max_rel_diff(&base, &rotated)
}

/// Largest relative change of the nontrivial eigenvalues when every
/// quadrature rule is raised to twice its degree. Only the geometric factors
/// are non-polynomial in these integrands.
pub fn doubling_change(case: &Case, k: usize, l: usize) -> f64 {
    let s = space(case, k, l);
    let run = |boost: usize| {
        let opts = AssemblyOptions {
            quad_boost: boost,
            ..AssemblyOptions::for_degree(l)
        };
        let sys = assemble_system::<fn(&Vector3<f64>) -> f64>(&s, &opts, None).unwrap();
        solve_eigen_with(&sys.a, &sys.m, 6, &ITERATIVE).unwrap().eigenvalues
    };
    max_rel_diff(&run(0)[1..], &run(2 * l + 2 * k + 1)[1..])
}

/// Largest entry change of `A`, relative to its largest entry, when the
/// quadrature degree is doubled.
pub fn matrix_doubling_change(case: &Case, k: usize, l: usize) -> f64 {
    let s = space(case, k, l);
    let run = |boost: usize| {
        let opts = AssemblyOptions {
            quad_boost: boost,
            ..AssemblyOptions::for_degree(l)
        };
        assemble_system::<fn(&Vector3<f64>) -> f64>(&s, &opts, None).unwrap().a
    };
    let (a, b) = (run(0), run(2 * l + 2 * k + 1));
    a.linear_combination(1.0, &b, -1.0).max_abs() / b.max_abs()
}

/// Slightly irregular planar lattice, so neighbourhoods are not all congruent.
pub fn planar_cloud(n: usize) -> PointCloud {
    let pts = (0..n * n)
        .map(|i| {
            let (a, b) = ((i % n) as f64, (i / n) as f64);
            let jitter = 0.1 * ((7.0 * a + 3.0 * b).sin());
            Vector3::new(
                -0.3 + 1.6 * (a + jitter) / (n - 1) as f64,
                -0.3 + 1.6 * b / (n - 1) as f64,
                0.0,
            )
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

/// Largest relative difference between matrices assembled on patches fitted
/// to a planar cloud and on the affine patches, over k = 1..3 and l = 1..3.
pub fn flat_equivalence() -> f64 {
    let mesh = pcdg::meshgen::flat_square_mesh(4, 1.0);
    let cloud = planar_cloud(61);
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let rec = reconstruct_patches(&mesh, &cloud, k, &ReconstructionOptions::default()).unwrap();
        let exact = exact_patches(&mesh, &ExactSurface::PlaneZ0, k).unwrap();
        for l in 1..=3 {
            let opts = AssemblyOptions::for_degree(l);
            let sa = DGSpace::new(mesh.clone(), rec.clone(), l).unwrap();
            let sb = DGSpace::new(mesh.clone(), exact.clone(), l).unwrap();
            let a = assemble_system::<fn(&Vector3<f64>) -> f64>(&sa, &opts, None).unwrap();
            let b = assemble_system::<fn(&Vector3<f64>) -> f64>(&sb, &opts, None).unwrap();
            let da = a.a.linear_combination(1.0, &b.a, -1.0).max_abs() / b.a.max_abs();
            let dm = a.m.linear_combination(1.0, &b.m, -1.0).max_abs() / b.m.max_abs();
            worst = worst.max(da).max(dm);
        }
    }
    worst
}
