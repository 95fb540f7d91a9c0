//! Singular spectrum analysis with structured, matrix-free linear algebra.
//!
//! The trajectory matrix of a length-`N` series is handled implicitly: its
//! products with vectors cost `O(N log N)` through circulant embedding
//! ([`hankel`]), the leading singular triples come from Lanczos
//! bidiagonalization ([`svd`]), and reconstruction averages antidiagonals of
//! rank-one terms by FFT convolution ([`ssa`]). [`hetero`] builds
//! heterogeneity matrices for structural change detection on top of these.

pub mod dft;
pub mod error;
pub mod hankel;
pub mod hetero;
pub mod input;
pub mod linalg;
pub mod ssa;
pub mod svd;

pub use error::{Error, Result};
pub use hankel::HankelOperator;
pub use hetero::{h_matrix, hetero_index, HeteroParams, HeterogeneityMatrix};
pub use ssa::{
    decompose, hankelize_rank1, naive_diag_avg, naive_hankelize_rank1, reconstruct, Decomposition,
    TimeSeries,
};
pub use svd::{
    bidiag_svd, lanczos_bidiag, trunc_svd, BidiagonalFactorization, LinearOperator, Reorth,
    SingularTriple, StartVector, SvdOptions,
};
