//! Structured optimal experimental design by tensor column subset selection.
//!
//! Candidate observations are arranged on a grid with `d` design modes (for
//! example sensors × time steps). A design keeps a subset of indices in each
//! mode, and its quality is the expected information gain
//! `log det(I + (AS)(AS)ᵀ)` of the prior-preconditioned forward matrix `A`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub type Matrix = nalgebra::DMatrix<f64>;

pub mod bench;
pub mod cssp;
pub mod error;
pub mod linalg;
mod math;
pub mod oed;
pub mod rng;
pub mod select;
pub mod selection;
pub mod tensor;

pub use error::{Error, Result};
pub use nalgebra;
pub use selection::SelectionOperator;
pub use tensor::{ModeShape, Tensor};
