//! File formats, table loading, run configuration and the command line of
//! the `mlptopo` tool.

pub use mlptopo_core as core;

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod table;

pub use error::{Error, Result};
