//! Trigonometric-polynomial constructions for pairs of functions with equal
//! Fourier-coefficient moduli and different winding numbers, with every
//! intermediate claim checked numerically.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod corrections;
pub mod demos;
pub mod error;
pub mod fft;
pub mod metrics;
pub mod numeric;
pub mod pipeline;
pub mod report;
pub mod simple_set;
pub mod trigpoly;

pub use error::{Error, Result};
pub use report::Check;
pub use simple_set::{Arc, SimpleSet};
pub use num_complex::Complex64;
pub use trigpoly::{extends, moduli_equal, GridSamples, ModuliReport, SupBound, TrigPoly};
