//! Multiscale quasi-interpolation of scattered data.
//!
//! Single-scale operators (Shepard, linear moving least squares, and a
//! Karcher-mean Shepard for SPD-valued data) are applied repeatedly over a
//! nested hierarchy of data subsets, each level fitting the residual left by
//! the previous ones. The [`stats`] and [`experiments`] modules measure the
//! resulting mean squared error, bias, variance and bias ratio by
//! Monte-Carlo simulation.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod operators;
pub mod multiscale;
pub mod stats;
pub mod exec;
pub mod experiments;
pub mod report;
pub mod cli;

pub use error::{Error, Result};

/// A point of the parameter domain `[0, 1]²`.
pub type Point = [f64; 2];

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}
