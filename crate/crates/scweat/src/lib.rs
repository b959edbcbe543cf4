//! File formats, parallel fan-out and the `scweat` command-line tool built
//! on `scweat-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod parallel;

pub use error::{AppError, Kind, Result};
