//! File formats, benchmarks and the `kronsketch` command line on top of
//! [`kronsketch_core`].

pub mod bench;
pub mod config;
pub mod error;
pub mod io;

pub use error::{Error, Result};
pub use kronsketch_core as core;
