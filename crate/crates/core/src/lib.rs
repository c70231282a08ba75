//! Determinant-maximizing completions of graph-constrained correlation
//! matrices, with the supporting numerics: couplings and clique sums, Ihara
//! zeta functions, spanning-tree counts, sphere Gram sampling and exact power
//! series of `τ(G, x)`.

pub mod audit;
pub mod coupling;
pub mod error;
pub mod gmrf;
pub mod graph;
pub mod ldp;
pub mod series;
pub mod symmat;
pub mod trees;
pub mod zeta;

pub use error::{Error, Result};
