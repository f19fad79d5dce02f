pub mod error;
pub mod linalg;

pub use error::{Error, Result};
pub use linalg::{RealMatrix, RealVector, DEFAULT_RCOND};
