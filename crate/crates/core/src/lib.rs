//! Codes in shells of the integer lattice.
//!
//! A *shell* `s_k` of `Z^n` is the set of integer vectors of squared norm
//! exactly `k`.  This crate builds large subsets of a shell whose pairwise
//! inner products stay at or below a bound `t`, by prescribing a group of
//! signed permutation symmetries and reducing the search to a weighted
//! maximum-clique problem on the orbits of that group:
//!
//! * [`shellgeom`] — shell enumeration, counting, canonical forms and
//!   inner-product utilities;
//! * [`symgroup`] — signed permutations, built-in group families, group
//!   order, and orbit partitions of a shell;
//! * [`orbitgraph`] — the orbit compatibility graph whose weighted cliques
//!   correspond to symmetric codes;
//! * [`cliquesolve`] — exact branch-and-bound maximum-weight clique search
//!   with an independent brute-force oracle;
//! * [`assembler`] — turning cliques back into verified codes, exact scaled
//!   embeddings, rational spherical embeddings, unions across shells, and
//!   the bound catalog.

pub mod assembler;
pub mod cliquesolve;
mod error;
pub mod orbitgraph;
pub mod shellgeom;
pub mod symgroup;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
