//! Experiment driver for the `chunkqe` command-line tool: configuration
//! loading, command implementations and atomic output.

pub mod commands;
pub mod config;
pub mod output;
