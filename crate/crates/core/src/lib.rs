//! Exact invariants of log surface pairs and orbifold pairs, computed from
//! decorated resolution graphs: Zariski decompositions, the local volume
//! `-P·P`, log discrepancies and thresholds, star-shaped closed forms, the
//! volume-zero classification and extremal searches.

pub mod classify0;
pub mod error;
pub mod extremal;
pub mod graph;
pub mod lattice;
pub mod pairs;
pub mod par;
pub mod random;
pub mod rat;
pub mod star;
pub mod zariski;

pub use error::{Error, Result};
pub use graph::{Arrow, DecoratedGraph, Edge, Locus, PairSpec, QDivisor, Vertex, Weight};
pub use lattice::{Decomposition, Growth, Lattice};
pub use rat::{int, rat, Rat, SymMatrix};
