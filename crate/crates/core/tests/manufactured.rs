//! Source problem on the unit square with `u = cos(pi x) cos(pi y)`, whose
//! zero normal derivative matches the natural boundary condition of the
//! interior-penalty form on an open mesh.

use pcdg::cli::pipeline::{source_study, ExperimentOptions, Problem, SurfaceChoice};

#[test]
fn flat_neumann_problem_converges_at_optimal_rates() {
    let problem = Problem::new(&SurfaceChoice::PlaneTest).unwrap();
    for l in 1..=3 {
        let (tables, _) = source_study(&problem, &ExperimentOptions::new(1, l, 4)).unwrap();
        let order = |name: &str| {
            let t = tables.iter().find(|t| t.metric == name).unwrap();
            t.orders().last().copied().flatten().unwrap()
        };
        let (p2, p1) = (order("l2"), order("h1"));
        assert!((p2 - (l + 1) as f64).abs() < 0.3, "l = {l}: L2 order {p2}");
        assert!((p1 - l as f64).abs() < 0.3, "l = {l}: H1 order {p1}");
    }
}
