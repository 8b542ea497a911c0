//! Sparse distributed state-feedback synthesis through clique-lifted LMIs.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the CLI
//! and the benchmark harness live in the `cliquelmi` companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod graph;
pub mod lifting;
pub mod linalg;
pub mod sdp;
pub mod synth;
pub mod verify;

pub use error::Error;

/// Dense column-major matrix used throughout.
pub type Mat = nalgebra::DMatrix<f64>;

pub type Result<T, E = Error> = core::result::Result<T, E>;
