//! Linear and generalized eigenvalue solvers for the assembled systems.

mod eigen;
mod source;
mod sparse;

pub use eigen::{dense_eigen, rayleigh_quotient, solve_eigen, solve_eigen_with, EigenOptions, EigenResult};
pub use source::{solve_source, solve_spd, SpdFactor};
pub use sparse::CsrMatrix;
