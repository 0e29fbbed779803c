//! Error measures against exact surfaces and convergence tables.

mod eigen;
mod geometric;
mod solution;
mod table;

pub use eigen::{
    aligned_eigenfunction_errors, errors_against_exact, group_multiplicities, inflated_sphere_gap,
    relative_level_errors, sphere_spectrum,
};
pub use geometric::{geometric_errors, metric_errors, metric_errors_continuous, GeoErrorReport, MetricErrorReport};
pub use solution::{solution_errors, ExactField, FnField, LinearField, SolutionErrors};
pub use table::{observed_order, ConvergenceTable, TableRow};
