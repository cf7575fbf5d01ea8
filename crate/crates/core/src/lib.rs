//! Band-dominated operators over finite windows of discrete metric spaces.

pub mod error;
pub mod fredholm;
pub mod limit;
pub mod linalg;
pub mod lower_norm;
pub mod operator;
pub mod partition;
pub mod space;
pub mod sparsify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
