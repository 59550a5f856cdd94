//! Numerical tools for Hölder functions: Weierstrass-type series, snowflake
//! embeddings, graph measures, packing dimensions, level sets and slices, and
//! the experiment harness that ties them together.

pub mod dimension;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod functions;
pub mod measures;
pub mod slicing;

pub use error::{Error, Result};
