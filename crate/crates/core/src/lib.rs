pub mod adapt;
pub mod assembly;
pub mod cli;
pub mod elements;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod solver;
pub mod verification;

pub use error::{Error, Result};
