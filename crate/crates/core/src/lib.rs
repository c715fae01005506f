//! Periodic tilings, functional equations and the Sudoku descent.

pub mod encoding;
pub mod error;
pub mod functional;
pub mod group;
pub mod rigid;
pub mod sudoku;
pub mod tiling;

pub use error::{Error, Result};
