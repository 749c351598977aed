//! Extended formulations of MSO polytopes over tree decompositions.

pub mod decompose;
pub mod error;
pub mod logic;
pub mod oracle;
pub mod pipeline;
pub mod polytope;
pub mod solve;
pub mod structures;
pub mod types;

pub use error::{Error, SyntaxError};
