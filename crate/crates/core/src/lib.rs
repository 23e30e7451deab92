pub mod cli;
pub mod curved2d;
pub mod discrete;
pub mod error;
pub mod geometry;
pub mod polybasis;
pub mod problems;
pub mod projectors;
pub mod solver;
pub mod vem2d;
pub mod vem3d;

pub use error::{Result, VemError};
