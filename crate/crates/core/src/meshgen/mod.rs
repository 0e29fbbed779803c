//! Point clouds, reference meshes and the refine-and-project pipeline.

mod cloud;
mod io;
mod kdtree;
mod mesh;
mod refine;
mod seeds;

use std::path::Path;

pub use cloud::{
    estimate_filling_distance, sample_sphere_cloud, sample_torus_cloud, sample_torus_cloud_with, PointCloud,
};
pub use io::{parse_off, parse_xyz, read_off, read_xyz, write_off, write_xyz};
pub use kdtree::KdTree;
pub use mesh::{MeshEdge, ReferenceMesh, DEFAULT_SHAPE_BOUND};
pub use refine::{project_to_tls_plane, project_vertices, refine_and_project, refine_onto_surface, refine_uniform};
pub use seeds::{
    convex_hull, fibonacci_sphere_mesh, fibonacci_sphere_points, flat_square_mesh, icosahedron, icosphere,
    torus_grid_mesh, SPHERE_SEED_VERTICES,
};

use crate::error::Result;
use crate::geometry::ExactSurface;

/// Tube and revolution vertex counts of the torus seed mesh.
pub const TORUS_SEED_GRID: (usize, usize) = (10, 20);

/// Where the coarsest reference mesh comes from.
#[derive(Debug, Clone, Copy)]
pub enum MeshSource<'a> {
    Surface(ExactSurface),
    File(&'a Path),
}

/// Closed, oriented, shape-regular seed mesh.
///
/// Synthetic seeds: a 222-vertex Fibonacci hull for the sphere, a structured
/// grid for a torus and a 4 x 4 square grid for the plane. File input must be
/// ASCII OFF.
pub fn build_initial_mesh(source: MeshSource<'_>) -> Result<ReferenceMesh> {
    let mesh = match source {
        MeshSource::Surface(ExactSurface::UnitSphere) => fibonacci_sphere_mesh(SPHERE_SEED_VERTICES)?,
        MeshSource::Surface(ExactSurface::Torus { major, minor }) => {
            torus_grid_mesh(major, minor, TORUS_SEED_GRID.0, TORUS_SEED_GRID.1)?
        }
        MeshSource::Surface(ExactSurface::PlaneZ0) => flat_square_mesh(4, 1.0),
        MeshSource::File(p) => read_off(p)?,
    };
    if let MeshSource::Surface(s) = source {
        if let Some(chi) = s.euler_characteristic() {
            mesh.check_euler_characteristic(chi)?;
        }
    }
    mesh.check_shape_regularity(DEFAULT_SHAPE_BOUND)?;
    Ok(mesh)
}
