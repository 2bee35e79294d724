//! All-pairs similarity search over Min-Max signatures.
//!
//! Fingerprints of one partition are loaded into `t` hash tables; every later fingerprint
//! queries them and pairs colliding in at least `m` tables become [`Triplet`]s. Looping over
//! partitions gives the same result as a single pass with a fraction of the table memory.

mod io;
mod params;
mod search;
mod tables;

pub use io::{
    decode_triplets, encode_triplets, read_triplets, write_triplets, TripletFormat, TripletHeader, TripletReader,
    TripletWriter, TRIPLET_MAGIC,
};
pub use params::{detection_probability, matching_threshold, SearchConfig};
pub use search::{
    occurrence_filter, partition_ranges, partitioned_search, query_partition, BucketStats, QueryCounts, SearchOutput,
    SearchStats, Triplet,
};
pub use tables::{build_tables, build_tables_filtered, HashTables, Table};
