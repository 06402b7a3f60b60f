//! Command line pipeline, metric store and HTTP API for the chemistry engine.

pub mod cli;
pub mod engine;
pub mod error;
pub mod http;
pub mod report;
pub mod store;
