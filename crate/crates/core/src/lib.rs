//! Spectral analysis of Kirchhoff Laplacians on radially symmetric metric trees.
//!
//! A radial tree is described by its edge lengths and branching numbers per
//! generation. The Laplacian on such a tree decomposes into an orthogonal sum
//! of halfline operators `-u''` whose solutions jump at the vertex positions
//! `t_n` according to `u(t_n+) = sqrt(b_n) u(t_n-)` and
//! `u'(t_n+) = u'(t_n-) / sqrt(b_n)`. Each halfline operator is encoded by the
//! atomic measure `sum_n beta_n delta_{t_n}` with
//! `beta_n = (sqrt(b_n) + 1) / (sqrt(b_n) - 1)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: geometries, atomic measures, and the tree decomposition.
//! - [`pieces`]: pieces, concatenation, decomposition properties, and
//!   eventual periodicity of symbol sequences.
//! - [`transfer`]: transfer matrices for free gaps and vertex jumps.
//! - [`weyl`]: nested Weyl disks and halfline m-functions with error radii.
//! - [`spectral`]: Floquet bands, periodic m-functions, numerical supports of
//!   absolutely continuous spectrum, harmonic measure, and reflectionless
//!   defects.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod pieces;
pub mod spectral;
pub mod transfer;
pub mod weyl;

pub use error::{Error, ErrorClass, Result};
pub use num_complex::Complex64;
