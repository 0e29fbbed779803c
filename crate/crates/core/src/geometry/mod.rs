//! Per-triangle geometry: local frames, polynomial patch fits, Newton
//! closest-point projection and the resulting curved patch maps.

mod exact;
mod frame;
mod lagrange;
pub mod monomial;
mod newton;
mod patch;
mod poly;

pub use exact::ExactSurface;
pub use frame::{build_local_frame, triangle_diameter, LocalFrame, DEGENERACY_RATIO};
pub use lagrange::{lattice_nodes, LagrangeBasis};
pub use newton::{newton_project, residual as newton_residual, Projection, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use patch::{
    build_exact_patch_map, build_patch_map, edge_sample, exact_jet, exact_patches, reconstruct_patches, EdgeSample,
    MetricSample, NewtonOptions, PatchMap, ReconstructionOptions,
};
pub use poly::{fit_local_samples, fit_patch_polynomial, FitOptions, FittedPolynomial, PointSelection};
