//! Verify, count, and search for collections of hyperplanes slicing the
//! edges of the n-dimensional hypercube.
//!
//! The library provides:
//!
//! - an exact model of `Q_n` with the strict-sign slicing predicate, brute
//!   force counting, and full verification ([`cube`]);
//! - compositions and the reduced hypercube, where fitness evaluation runs
//!   on a small grid with edge multiplicities ([`reduced`]);
//! - an adaptive edge-weighted hill-climbing search with a variance-penalized
//!   fitness and parallel restarts ([`search`]);
//! - a tabu-search variant keyed by incidence hashes ([`tabu`]);
//! - the subadditivity upper-bound calculus and best-known value tables
//!   ([`bounds`]);
//! - embedded golden constructions ([`fixtures`]) and the plain-text
//!   construction format ([`io`]).

pub mod bounds;
pub mod cube;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod reduced;
pub mod rng;
pub mod search;
pub mod tabu;

pub use cube::{
    count_sliced, edge_total, slices, verify_full, Bias, Edge, Hyperplane, PlaneSet,
    Verification, Vertex,
};
pub use error::{Error, Result};
pub use reduced::{
    build_grid, reduce_plane, reduced_dot, sliced_reduced_edges, weighted_sliced_count,
    Composition, ReducedGrid, ReducedHyperplane, ReducedVertex,
};
