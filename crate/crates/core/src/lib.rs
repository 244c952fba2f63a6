//! Numerical toolkit for compositions of generalized Hénon maps: Green's
//! functions, Böttcher coordinates, commutation and iterate-matching tests,
//! and one-variable polynomial comparisons.

pub mod bottcher;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod henon;
pub mod mapfile;
pub mod onedim;
pub mod poly;
pub mod rigidity;
pub mod witness;

pub use error::{Error, Result};
