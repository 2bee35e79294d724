//! Reoccurring-event detection over continuous multi-station time series.
//!
//! Waveform windows are fingerprinted into sparse binary vectors, similar pairs
//! are found with Min-Max hash LSH, and the resulting similarity triplets are
//! aligned across channels, stations and the network into candidate events.

mod codec;
pub mod align;
pub mod bench;
pub mod error;
pub mod fingerprint;
pub mod ingest;
pub mod lsh_search;
pub mod minmax_hash;
pub mod pipeline;
pub mod pool;

pub use error::{Error, ErrorKind, Result};
