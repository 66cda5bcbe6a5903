//! Dense numerical kernel: least squares, symmetric eigendecomposition,
//! singular values, numeric rank and polynomial roots.
//!
//! Everything here is a pure function over owned or borrowed inputs.

pub mod eigen;
pub mod lstsq;
pub mod matrix;
pub mod poly;
pub mod svd;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use lstsq::{complex_least_squares, least_squares_solve, LeastSquares, LstsqSolution, DEFAULT_RCOND};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use poly::{pair_conjugates, polynomial_roots, RealPolynomial, PAIRING_TOLERANCE, ROOT_TOLERANCE};
pub use svd::{numeric_rank, singular_values};

/// Default relative tolerance for [`numeric_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
