//! File formats, benchmark harness and command-line plumbing around
//! [`structsel_core`].

pub mod compare;
pub mod error;
pub mod json;
pub mod manifest;
pub mod matrix_csv;
pub mod problem_io;
pub mod report;

pub use error::{Error, Result};
