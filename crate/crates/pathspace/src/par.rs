//! Execution policy for the embarrassingly parallel layers.
//!
//! Homotopy solves factor into independent per-ray integrations, so the
//! only parallel primitive needed is an indexed map that returns results
//! in index order. Output is a plain `Vec` built by index, which makes the
//! result bit-identical whether the map ran on one thread or many — thread
//! count can never reorder or renumber anything. Callers that can fail map
//! to `Vec<Result<..>>` and reduce sequentially in index order, so even
//! error selection is deterministic.
//!
//! With the `parallel` feature disabled the same API runs sequentially.

use std::str::FromStr;

/// How to run indexed maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    /// Plain loop on the calling thread.
    Sequential,
    /// Default thread pool (one worker per core when the `parallel`
    /// feature is on; sequential otherwise).
    Auto,
    /// Dedicated pool with exactly this many workers.
    Threads(usize),
}

impl FromStr for Parallelism {
    type Err = String;

    fn from_str(s: &str) -> Result<Parallelism, String> {
        match s.trim() {
            "" | "auto" => Ok(Parallelism::Auto),
            other => match other.parse::<usize>() {
                Ok(0) => Ok(Parallelism::Auto),
                Ok(1) => Ok(Parallelism::Sequential),
                Ok(k) => Ok(Parallelism::Threads(k)),
                Err(_) => Err(format!(
                    "invalid thread count `{other}` (expected a non-negative integer or `auto`)"
                )),
            },
        }
    }
}

impl Parallelism {
    /// Read the `PATHSPACE_THREADS` environment variable: unset, empty,
    /// `auto`, and `0` all mean [`Parallelism::Auto`]; `1` runs
    /// sequentially; larger values pick an explicit worker count.
    pub fn from_env() -> Result<Parallelism, String> {
        match std::env::var("PATHSPACE_THREADS") {
            Ok(val) => val.parse(),
            Err(std::env::VarError::NotPresent) => Ok(Parallelism::Auto),
            Err(e) => Err(format!("PATHSPACE_THREADS is not valid unicode: {e}")),
        }
    }
}

/// Apply `f` to `0..n` and collect the outputs in index order.
pub fn map_indexed<T, F>(par: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match par {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Auto => map_auto(n, f),
        Parallelism::Threads(k) => map_pool(k, n, f),
    }
}

#[cfg(feature = "parallel")]
fn map_auto<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn map_pool<T, F>(threads: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_auto<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_pool<T, F>(_threads: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
