//! Diagonal-union composition of digraphs.
//!
//! A digraph `D` with a factorization `F = {H_1, …, H_k}` is blown up into
//! `k` copies of its vertex set; copy `j` of `u` points at copy `j'` of `v`
//! exactly when `(u, v)` is an arc of `H_{j'}`. Iterating the construction
//! with the regular representation of `Z_k` gives the depth-`d` union. The
//! crate also provides line digraphs, state splits, unitary weightings that
//! realise the composed digraphs as supports of unitary matrices, and the
//! connectivity metrics used to judge them as network topologies.

pub mod analysis;
pub mod cli;
pub mod digraph;
pub mod factorization;
pub mod formats;
pub mod matrix;
pub mod symbolic;
pub mod transforms;

pub use digraph::{Digraph, GraphError, VertexMap};
pub use factorization::{Factorization, Violation};
pub use matrix::{DenseMatrix, PermutationMatrix};
