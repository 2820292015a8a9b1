//! Regular trees over countable alphabets, condition sets, smallness
//! checkers with certificates, the Cantor–Bendixson decomposition and
//! generalized Banach–Mazur games.

pub mod conditions;
pub mod error;
pub mod games;
pub mod smallness;
pub mod tree;

pub use error::{Error, Result};
