pub mod catalog;
pub mod error;
pub mod hexsys;
pub mod lattice;
pub mod legs;
pub mod polytopes;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
