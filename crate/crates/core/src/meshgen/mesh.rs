use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::triangle_diameter;

pub const DEFAULT_SHAPE_BOUND: f64 = 0.1;

/// One mesh edge and its incident `(triangle, local edge)` pairs.
///
/// Local edge `i` of a triangle runs from its vertex `i` to vertex `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshEdge {
    /// Endpoint vertex indices, smaller first.
    pub vertices: [usize; 2],
    pub incidences: Vec<(usize, usize)>,
}

impl MeshEdge {
    pub fn is_interior(&self) -> bool {
        self.incidences.len() == 2
    }
}

/// Flat triangulation serving as the parametric domain.
#[derive(Debug, Clone)]
pub struct ReferenceMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<MeshEdge>,
    h: f64,
    level: usize,
}

impl ReferenceMesh {
    /// Triangulation with edge topology; boundary edges are allowed.
    ///
    /// Fails on out-of-range indices, repeated vertices within a triangle,
    /// edges shared by more than two triangles and inconsistently oriented
    /// neighbours.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>, level: usize) -> Result<Self> {
        let nv = vertices.len();
        let mut map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::NonManifoldMesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::NonManifoldMesh(format!("triangle {t} repeats a vertex")));
            }
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *map.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge {
                        vertices: [key.0, key.1],
                        incidences: Vec::with_capacity(2),
                    });
                    edges.len() - 1
                });
                edges[id].incidences.push((t, i));
            }
        }
        for e in &edges {
            if e.incidences.len() > 2 {
                return Err(Error::NonManifoldMesh(format!(
                    "edge ({}, {}) has {} incident triangles",
                    e.vertices[0],
                    e.vertices[1],
                    e.incidences.len()
                )));
            }
            if let [(t0, i0), (t1, i1)] = e.incidences[..] {
                // consistent orientation traverses a shared edge in opposite directions
                if triangles[t0][i0] == triangles[t1][i1] {
                    return Err(Error::InvertedOrientation(t0, t1));
                }
            }
        }
        let h = triangles
            .iter()
            .map(|t| triangle_diameter(&[vertices[t[0]], vertices[t[1]], vertices[t[2]]]))
            .fold(0.0, f64::max);
        Ok(Self {
            vertices,
            triangles,
            edges,
            h,
            level,
        })
    }

    /// Like [`ReferenceMesh::new`] but additionally requires a closed surface.
    pub fn new_closed(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>, level: usize) -> Result<Self> {
        let m = Self::new(vertices, triangles, level)?;
        let open = m.boundary_edge_count();
        if open > 0 {
            return Err(Error::OpenSurface { boundary_edges: open });
        }
        Ok(m)
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    /// Largest triangle diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn triangle_points(&self, t: usize) -> [Vector3<f64>; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.incidences.len() == 1).count()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edge_count() == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Inradius over diameter of triangle `t` (equilateral: `1 / (2 sqrt 3)`).
    pub fn shape_ratio(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        let a = (p[1] - p[0]).norm();
        let b = (p[2] - p[1]).norm();
        let c = (p[0] - p[2]).norm();
        let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
        let inradius = 2.0 * area / (a + b + c);
        inradius / a.max(b).max(c)
    }

    pub fn min_shape_ratio(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.shape_ratio(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_shape_regularity(&self, bound: f64) -> Result<()> {
        for t in 0..self.triangles.len() {
            let ratio = self.shape_ratio(t);
            if !(ratio >= bound) {
                return Err(Error::ShapeRegularity {
                    triangle: t,
                    ratio,
                    bound,
                });
            }
        }
        Ok(())
    }

    pub fn check_euler_characteristic(&self, expected: i64) -> Result<()> {
        let chi = self.euler_characteristic();
        if chi != expected {
            return Err(Error::NonManifoldMesh(format!(
                "Euler characteristic {chi}, expected {expected}"
            )));
        }
        Ok(())
    }

    /// Same connectivity with new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Vector3<f64>>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len());
        let h = self
            .triangles
            .iter()
            .map(|t| triangle_diameter(&[vertices[t[0]], vertices[t[1]], vertices[t[2]]]))
            .fold(0.0, f64::max);
        Self {
            vertices,
            triangles: self.triangles.clone(),
            edges: self.edges.clone(),
            h,
            level: self.level,
        }
    }

    /// Total flat area.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let p = self.triangle_points(t);
                0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
        let v = vec![
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        (v, t)
    }

    #[test]
    fn tetrahedron_topology() {
        let (v, t) = tetra();
        let m = ReferenceMesh::new_closed(v, t, 0).unwrap();
        assert_eq!(m.edges().len(), 6);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.edges().iter().all(|e| e.is_interior()));
        assert!((m.shape_ratio(0) - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn single_triangle_is_open() {
        let v = vec![Vector3::zeros(), Vector3::x(), Vector3::y()];
        let r = ReferenceMesh::new_closed(v, vec![[0, 1, 2]], 0);
        assert!(matches!(r, Err(Error::OpenSurface { boundary_edges: 3 })));
    }

    #[test]
    fn flipped_triangle_detected() {
        let (v, mut t) = tetra();
        t[3] = [1, 2, 3];
        assert!(matches!(
            ReferenceMesh::new(v, t, 0),
            Err(Error::InvertedOrientation(..))
        ));
    }

    #[test]
    fn fan_edge_is_non_manifold() {
        let v = vec![
            Vector3::zeros(),
            Vector3::x(),
            Vector3::y(),
            -Vector3::y(),
            Vector3::z(),
        ];
        let t = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        assert!(matches!(ReferenceMesh::new(v, t, 0), Err(Error::NonManifoldMesh(_))));
    }
}
