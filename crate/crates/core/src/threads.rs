//! Parallelism cap taken from the `INFOQM_THREADS` environment variable.

/// Environment variable holding a positive thread count.
pub const THREADS_ENV: &str = "INFOQM_THREADS";

/// Parses `INFOQM_THREADS`; `Ok(None)` when unset.
pub fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")),
        },
    }
}

/// Runs `f` inside a rayon pool capped at `threads` workers.
pub fn install<R, F>(threads: Option<usize>, f: F) -> Result<R, String>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| e.to_string()),
    }
}
