//! Weyl-Moyal deformation quantization on finite-dimensional Poisson
//! vector spaces and Poisson vector bundles: exact plane-wave star
//! products, band-limited grid backends, Heisenberg group representations
//! with operator-norm estimates, section algebras over sampled bases, and
//! the Lorentz-orbit construction of quantum-spacetime fibers.

// Dense kernels index both sides of multi-dimensional arrays; explicit
// indices are the clearer idiom there.
#![allow(clippy::needless_range_loop)]

pub mod bundle;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod io;
pub mod orbit;
pub mod planewave;
pub mod poisson;
pub mod sectional;
pub mod star;
pub mod weyl;

pub use error::{MoyalError, Result};
