//! Numerical laboratory for sampling the high-dimensional sphere by a random
//! subspace and its orthogonal complement.
//!
//! The crate provides:
//!
//! * seeded, splittable random streams and the small dense linear algebra
//!   (QR, Jacobi eigen, Gram SVD) the experiments need ([`rng`], [`matrix`],
//!   [`linalg`]),
//! * uniform sampling on spheres and Grassmannians, the ball-to-sphere lift
//!   and exact measures of coordinate-determined sets ([`sphere`]),
//! * principal angles of random subspaces and the Wishart-ratio construction
//!   with its concentration statistics ([`spectra`]),
//! * the geometric-mean statistic `sqrt(sigma_H(A) * sigma_Hperp(A))`, its
//!   reduced k-dimensional integral form, the Cauchy-Schwarz lower bound and
//!   the Laplace-method tail bounds ([`concentration`]),
//! * a bit-counting simulation of the O(sqrt(n))-bit vector-in-subspace
//!   protocol ([`vsp`]),
//! * product-measure rectangle checks and the partition bit audit
//!   ([`rectangle`]).
//!
//! Everything is deterministic given a master seed: trials draw from
//! independent indexed streams, so results do not depend on thread count.

pub mod concentration;
pub mod linalg;
pub mod matrix;
pub mod quadrature;
pub mod rectangle;
pub mod rng;
pub mod special;
pub mod spectra;
pub mod sphere;
pub mod stats;
pub mod vsp;

pub use matrix::Matrix;
pub use rng::RngStream;

/// Errors surfaced by the numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate spectrum: a principal cosine is 0 or 1")]
    DegenerateSpectrum,
    #[error("set has zero measure")]
    ZeroMeasure,
    #[error("no sampled subspace fell in the Grassmannian subset")]
    EmptyGrassmannSubset,
    #[error("rejection sampling acceptance below {0:.1e}; aborting")]
    RejectionTooRare(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
