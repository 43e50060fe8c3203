//! Exact finite-window computations for Schur pairs in `k((u))((t))`,
//! ribbon cohomology on the projective line, and related demonstrations.
//!
//! Everything is exact: scalars live in `Q` or a prime field `F_p`, and all
//! infinite objects are represented by finite echelon data inside explicit
//! truncation windows.

pub mod series;
pub mod linalg;
pub mod local2d;
pub mod fredholm;
pub mod schur;
pub mod geometry;
pub mod cohomology;
pub mod json;
pub mod cli;

pub use series::{Field, LaurentPoly, LaurentVec, Scalar, SeriesError};
pub use local2d::{Local2DElement, Local2DVector, Window2D};
pub use fredholm::{fredholm_index, membership, pivot_profile, Membership, WindowedSubspace};
