//! Spherical Radon transforms whose sphere radius varies with the center.
//!
//! The transform integrates a density `f` over circles `S(y)` of center `y`
//! and radius `r(y)`. This crate provides:
//!
//! - [`geometry`]: radius models and audits of when reconstruction can be
//!   stable (norm inequality, artifact points, preimage centers).
//! - [`projector`]: a sparse discretization of the transform, its exact
//!   transpose, smooth sinogram cutoffs and continuous backprojections.
//! - [`recon`]: filtered backprojection, Landweber and TV reconstruction.
//! - [`harmonic`]: the constant-radius Abel inversion and the rotational
//!   equidistant-sphere change of variables.
//! - [`harness`]: phantoms, noise, error metrics and end-to-end experiments.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod grid;
pub mod harmonic;
pub mod harness;
pub mod io;
pub mod projector;
pub mod recon;

pub use error::{Error, Result};
pub use grid::{GeometryId, Image, ImageSpec, Sinogram};

/// Points and vectors in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
