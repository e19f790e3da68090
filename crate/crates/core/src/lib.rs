//! Discrete toolkit for torsion functions of Schrödinger operators
//! `-Δ + V` with singular potentials on bounded planar and radial domains.

pub mod error;
pub mod grid;
pub mod linalg;
pub mod potential;
pub mod variational;
pub mod decomposition;
pub mod iteration;
pub mod oracle;
pub mod config;
pub mod export;
pub mod app;
pub mod verify;

pub use error::{LabError, Result};
