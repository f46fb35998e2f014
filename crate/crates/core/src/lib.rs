//! Certified upper bounds for the packing density of regular pentagons.
//!
//! A sums-of-squares semidefinite program over the Euclidean motion group
//! searches for a function whose operator Fourier transform is positive and
//! which is nonpositive wherever two pentagon copies cannot overlap. The
//! solution is then projected, checked in extended precision, and turned
//! into a density bound.

pub mod certify;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod hp;
pub mod motion;
pub mod pipeline;
pub mod quadrature;
pub mod real;
pub mod sdp;
pub mod sos;
pub mod specfun;
pub mod theta;

pub use error::{Error, Result};
