//! Nonconforming least-squares finite element methods for general second-order
//! elliptic equations `-div(A grad u) + b.grad u + c u = f` on 2D polygonal
//! domains with mixed Dirichlet/Neumann boundaries.
//!
//! The toolkit provides:
//!
//! * conforming triangular meshes with uniform (red) refinement and
//!   newest-vertex bisection ([`mesh`]),
//! * Crouzeix-Raviart, lowest-order Raviart-Thomas, lowest-order Nedelec (2D),
//!   and Lagrange spaces with interpolation ([`fespace`]),
//! * assembly of the two-field potential-flux div least-squares method, the
//!   three-field potential-flux-intensity div-curl method, a restricted
//!   two-field div-curl method with a conforming flux space, and the plain
//!   nonconforming Galerkin baseline ([`assembly`]),
//! * Jacobi-preconditioned conjugate gradients with breakdown detection and a
//!   dense fallback for small systems ([`linsolve`]),
//! * a posteriori error estimators, the conforming enrichment operator, and a
//!   numerical witness that the plain div functional is not norm-equivalent on
//!   the broken space ([`estimators`]),
//! * Dörfler marking and an adaptive refinement loop ([`adapt`]),
//! * convergence/coercivity experiment drivers with CSV output
//!   ([`experiments`]).

pub mod adapt;
pub mod assembly;
pub mod config;
pub mod estimators;
pub mod experiments;
pub mod expr;
pub mod fespace;
pub mod geometry;
pub mod io;
pub mod linsolve;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod sparse;

pub use adapt::{adapt_loop, dorfler_mark, AdaptOptions, AdaptTrace};
pub use assembly::{LsFunctional, LsSystem, Method};
pub use estimators::EstimatorReport;
pub use fespace::{build_space, Field, FeSpace, SpaceKind};
pub use linsolve::SolveReport;
pub use mesh::{BoundaryTag, Side, Triangulation};
pub use problem::ProblemSpec;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("coefficient data error: {0}")]
    Data(String),
    #[error("mesh/space mismatch: {0}")]
    Mismatch(String),
    #[error("method restriction violated: {0}")]
    Restriction(String),
    #[error("exact solution callbacks missing for problem '{0}'")]
    MissingExact(String),
    #[error("system too large for dense solve: {dofs} dofs (limit {limit})")]
    TooLarge { dofs: usize, limit: usize },
    #[error("singular matrix: near-zero pivot at index {pivot}")]
    Singular { pivot: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
