use thiserror::Error;

/// Errors raised anywhere in the reconstruction / discretization pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate triangle: area {area:e} below threshold {threshold:e}")]
    DegenerateTriangle { area: f64, threshold: f64 },

    #[error("rank-deficient fit: condition estimate {condition:e} exceeds bound {bound:e}")]
    RankDeficientFit { condition: f64, bound: f64 },

    #[error("insufficient points: need {needed}, cloud has {available}")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("newton projection diverged: residual {residual:e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },

    #[error("singular metric: det g = {det:e}")]
    SingularMetric { det: f64 },

    #[error("non-manifold mesh: {0}")]
    NonManifoldMesh(String),

    #[error("open surface: {boundary_edges} boundary edges")]
    OpenSurface { boundary_edges: usize },

    #[error("inconsistent orientation across edge ({0}, {1})")]
    InvertedOrientation(usize, usize),

    #[error("shape regularity violated on triangle {triangle}: ratio {ratio:.4} < {bound}")]
    ShapeRegularity { triangle: usize, ratio: f64, bound: f64 },

    #[error("non-conforming edge between triangles {0} and {1}")]
    NonConformingEdge(usize, usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigensolver stagnated: {converged}/{wanted} pairs converged, max residual {max_residual:e}")]
    SolverStagnation {
        converged: usize,
        wanted: usize,
        max_residual: f64,
    },

    #[error("linear solve stalled: relative residual {relative:e}, backward error {backward:e}")]
    SolveResidual { relative: f64, backward: f64 },

    #[error("multiplicity mismatch: group sizes {0:?} vs {1:?}")]
    MultiplicityMismatch(Vec<usize>, Vec<usize>),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("triangle {triangle}: {source}")]
    OnTriangle { triangle: usize, source: Box<Error> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Attach the index of the triangle on which a geometric operation failed.
    pub fn on_triangle(self, triangle: usize) -> Self {
        match self {
            e @ Error::OnTriangle { .. } => e,
            e => Error::OnTriangle {
                triangle,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any triangle annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::OnTriangle { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_geometry(&self) -> bool {
        matches!(
            self.root(),
            Error::DegenerateTriangle { .. }
                | Error::RankDeficientFit { .. }
                | Error::InsufficientPoints { .. }
                | Error::NewtonDiverged { .. }
                | Error::SingularMetric { .. }
                | Error::NonManifoldMesh(_)
                | Error::OpenSurface { .. }
                | Error::InvertedOrientation(..)
                | Error::ShapeRegularity { .. }
                | Error::NonConformingEdge(..)
        )
    }

    pub fn is_solver(&self) -> bool {
        matches!(
            self.root(),
            Error::NotPositiveDefinite | Error::SolverStagnation { .. } | Error::SolveResidual { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
