//! Broken polynomial spaces on patches, quadrature and IPDG assembly.

mod assemble;
mod basis;
mod quadrature;
mod space;

pub use assemble::{
    assemble_bilinear, assemble_mass, assemble_rhs, assemble_system, AssembledSystem, AssemblyOptions, JumpVariant,
    PenaltyScale, RhsEvaluation,
};
pub use basis::OrthonormalBasis;
pub use quadrature::{gauss_legendre, EdgeRule, QuadratureRule, TriangleRule};
pub use space::{DGSpace, EdgeSide};
