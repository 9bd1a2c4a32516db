//! Exact arithmetic for Artin–Schreier–Witt towers: Witt vectors, Galois
//! rings, exponential sums, L-functions, Dwork's T-adic matrix and Newton
//! polygons.

pub mod arith;
pub mod cyclotomic;
pub mod dwork;
pub mod error;
pub mod expsums;
pub mod field;
pub mod galois_ring;
pub mod lseries;
pub mod polygon;
pub mod tower;
pub mod witt;

pub use error::{Error, Result};
pub use tower::{TowerConfig, TowerConstants, TowerSpec};
