//! Command line and HTTP front ends for `scirank-core`.

pub mod cli;
pub mod http;
pub mod state;
