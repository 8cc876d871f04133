//! Numerical laboratory for pseudo-Finsler submersions.

pub mod error;
pub mod chern;
pub mod jets;
pub mod metric;
pub mod numerics;
pub mod submersion;
pub mod geodesics;
pub mod zoo;
pub mod verify;
pub mod expr;
pub mod spec_file;
pub mod cli;

pub use error::{GeomError, GeomResult, JetError};
pub use jets::{Jet, Scalar};
