//! File formats, run reports and the `sensorgraph` command line around
//! [`sensorgraph_core`].

pub mod batch;
pub mod cli;
pub mod config;
pub mod formats;
pub mod report;

