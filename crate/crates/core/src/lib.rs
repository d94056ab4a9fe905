pub mod dirac;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod tilings;
pub mod traintracks;

pub use error::{Error, Result};
pub use num_complex::Complex64;
