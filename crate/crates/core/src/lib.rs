//! Triangle, shear and length coordinates for Hitchin representations of
//! closed surface groups, computed exactly over the rationals where possible.

pub mod atlas;
pub mod coords;
pub mod eigen;
pub mod fixtures;
pub mod flag;
pub mod identities;
pub mod invariants;
pub mod lamination;
pub mod linalg;
pub mod polytope;
pub mod representation;
pub mod scalar;
pub mod synthesis;

pub use linalg::{LinalgError, Matrix};
pub use scalar::{Scalar, DEFAULT_PRECISION};
