//! Worker-count control for the parallel stages.

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool for `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Parameter(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
