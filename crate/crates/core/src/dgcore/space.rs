use nalgebra::{DVector, Vector2, Vector3};
use rayon::prelude::*;

use super::basis::OrthonormalBasis;
use crate::error::{Error, Result};
use crate::geometry::{lattice_nodes, PatchMap};
use crate::meshgen::ReferenceMesh;

/// Reference-triangle vertices; local edge `i` runs from vertex `i` to `i + 1`.
const REF_VERTICES: [Vector2<f64>; 3] = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];

/// Fully discontinuous degree-`l` space over the patches of a reference mesh.
#[derive(Debug, Clone)]
pub struct DGSpace {
    mesh: ReferenceMesh,
    patches: Vec<PatchMap>,
    basis: OrthonormalBasis,
}

/// One side of an interior edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSide {
    pub triangle: usize,
    pub local_edge: usize,
    /// True when the local edge runs from the larger to the smaller global vertex.
    pub reversed: bool,
}

impl EdgeSide {
    /// Reference point at parameter `t` measured from the smaller global vertex.
    pub fn reference_point(&self, t: f64) -> Vector2<f64> {
        let tau = if self.reversed { 1.0 - t } else { t };
        let a = REF_VERTICES[self.local_edge];
        let b = REF_VERTICES[(self.local_edge + 1) % 3];
        a + (b - a) * tau
    }
}

impl DGSpace {
    pub fn new(mesh: ReferenceMesh, patches: Vec<PatchMap>, l: usize) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidArgument("function degree l must be at least 1".into()));
        }
        if patches.len() != mesh.triangles().len() {
            return Err(Error::InvalidArgument(format!(
                "{} patches for {} triangles",
                patches.len(),
                mesh.triangles().len()
            )));
        }
        Ok(Self {
            mesh,
            patches,
            basis: OrthonormalBasis::new(l),
        })
    }

    pub fn mesh(&self) -> &ReferenceMesh {
        &self.mesh
    }

    pub fn patches(&self) -> &[PatchMap] {
        &self.patches
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn l(&self) -> usize {
        self.basis.degree()
    }

    /// Geometric degree of the patches.
    pub fn k(&self) -> usize {
        self.patches.first().map(|p| p.degree()).unwrap_or(1)
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.basis.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs_per_cell() * self.patches.len()
    }

    pub fn offset(&self, triangle: usize) -> usize {
        triangle * self.dofs_per_cell()
    }

    /// Both sides of interior edge `edge`, '+' (smaller triangle index) first;
    /// `None` for boundary edges.
    pub fn edge_sides(&self, edge: usize) -> Result<Option<[EdgeSide; 2]>> {
        let e = &self.mesh.edges()[edge];
        let [(t0, i0), (t1, i1)] = match e.incidences[..] {
            [a, b] => [a, b],
            _ => return Ok(None),
        };
        let side = |t: usize, i: usize| -> Result<EdgeSide> {
            let tri = self.mesh.triangles()[t];
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            if (a.min(b), a.max(b)) != (e.vertices[0], e.vertices[1]) {
                return Err(Error::NonConformingEdge(t0, t1));
            }
            Ok(EdgeSide {
                triangle: t,
                local_edge: i,
                reversed: a > b,
            })
        };
        let (a, b) = (side(t0, i0)?, side(t1, i1)?);
        Ok(Some(if t0 < t1 { [a, b] } else { [b, a] }))
    }

    /// Value of the discrete function `coeffs` at reference point `xi` of `triangle`.
    pub fn evaluate(&self, coeffs: &[f64], triangle: usize, xi: &Vector2<f64>) -> f64 {
        let n = self.dofs_per_cell();
        let mut v = [0.0; 64];
        self.basis.values(xi, &mut v[..n]);
        let c = &coeffs[self.offset(triangle)..self.offset(triangle) + n];
        v[..n].iter().zip(c).map(|(a, b)| a * b).sum()
    }

    /// Value and parametric gradient at reference point `xi` of `triangle`.
    pub fn evaluate_with_gradient(&self, coeffs: &[f64], triangle: usize, xi: &Vector2<f64>) -> (f64, Vector2<f64>) {
        let n = self.dofs_per_cell();
        let mut v = [0.0; 64];
        let mut g = [Vector2::zeros(); 64];
        self.basis.values_and_gradients(xi, &mut v[..n], &mut g[..n]);
        let c = &coeffs[self.offset(triangle)..self.offset(triangle) + n];
        let mut u = 0.0;
        let mut gr = Vector2::zeros();
        for i in 0..n {
            u += v[i] * c[i];
            gr += g[i] * c[i];
        }
        let bt = self.patches[triangle].reference_gradient_map().transpose();
        (u, bt * gr)
    }

    /// Nodal interpolant: `u` sampled at the images under each patch map of the
    /// degree-`l` lattice nodes.
    pub fn interpolate<F>(&self, u: F) -> Vec<f64>
    where
        F: Fn(&Vector3<f64>) -> f64 + Sync,
    {
        let nodes = lattice_nodes(self.l());
        let conv = self.basis.nodal_to_modal();
        self.patches
            .par_iter()
            .flat_map_iter(|p| {
                let vals = DVector::from_iterator(nodes.len(), nodes.iter().map(|xi| u(&p.point_at_reference(xi))));
                (conv * vals).iter().copied().collect::<Vec<_>>()
            })
            .collect()
    }
}
