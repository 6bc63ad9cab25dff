//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the [`ExecMode::Parallel`] mode fans work out
//! over the rayon pool; without it both modes run sequentially. Callers must
//! only hand in closures whose result depends on the index alone, so the two
//! modes produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use crate::error::Error;
use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

pub fn map_range<T, F>(mode: ExecMode, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..len).map(f).collect()
}

pub fn map_slice<S, T, F>(mode: ExecMode, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(usize, &S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().enumerate().map(|(i, s)| f(i, s)).collect();
    }
    let _ = mode;
    items.iter().enumerate().map(|(i, s)| f(i, s)).collect()
}

/// Runs two closures, concurrently when allowed.
pub fn join<A, B, RA, RB>(mode: ExecMode, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return rayon::join(a, b);
    }
    let _ = mode;
    (a(), b())
}

/// Sizes the global worker pool. Must run before any parallel work; without
/// the `parallel` feature it does nothing.
pub fn init_thread_pool(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Domain(format!("cannot size the worker pool: {e}")))?;
    let _ = threads;
    Ok(())
}
