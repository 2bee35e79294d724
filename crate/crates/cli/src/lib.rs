//! Configuration, file-backed stages and tools behind the `quakescan` binary.

pub mod config;
pub mod error;
pub mod stages;
pub mod tools;
