//! Classical estimators for forrelation and related quantum amplitudes.
//!
//! The crate is organised bottom-up:
//!
//! * [`bitkit`]: GF(2) algebra, Gray codes and Walsh-Hadamard transforms.
//! * [`forrelation`]: exact and affine-subspace estimators of `Φ(f,g)`.
//! * [`query_sim`]: k-query amplitudes and k-fold forrelation.
//! * [`graph`]: graphs, planar lattices, peeling partitions and tree decompositions.
//! * [`two_local`]: two-local functions and their width-parameterized sums.
//! * [`graph_forrelation`]: the graph-based forrelation estimator.
//! * [`tn_sampler`]: tensor-network sampling over a tree decomposition.
//! * [`qaoa`]: level-2 QAOA mean values and the RQAOA driver.

pub mod bitkit;
pub mod error;
pub mod formats;
pub mod forrelation;
pub mod graph;
pub mod graph_forrelation;
pub mod linalg;
pub mod oracle;
pub mod qaoa;
pub mod query_sim;
pub mod rng;
pub mod tn_sampler;
pub mod two_local;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand for double-precision complex numbers.
pub type C64 = Complex64;
