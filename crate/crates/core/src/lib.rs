//! Spectral decomposition of discrete Schrödinger-type operators with
//! dislocations, plus the kernel and resolvent identities used to bound them.

pub mod banded;
pub mod bloch;
pub mod continuum;
pub mod essential;
pub mod hyperbolic;
pub mod lattice_ops;
pub mod linalg;
pub mod models;
pub mod pseudores;
pub mod quad;
pub mod spectrum;
pub mod svg;
pub mod weyl;
