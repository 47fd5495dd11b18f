//! Worker-pool configuration.

/// Environment variable bounding worker threads; `0` or unset means automatic.
pub const THREADS_ENV: &str = "HILBEQ_THREADS";

/// Configures the global pool from `HILBEQ_THREADS`. Returns the thread count
/// requested, or `None` for automatic. Later calls have no effect.
pub fn init_from_env() -> Option<usize> {
    let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
    if n == 0 {
        return None;
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Some(n)
}
