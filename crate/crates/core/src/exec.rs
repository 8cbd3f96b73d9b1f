//! Execution of independent, index-addressed work items.
//!
//! Every work item receives its own index and derives any randomness from
//! `(master seed, index)` through [`stream_rng`], so the sequential and the
//! parallel paths produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How batches of independent work items run. Defaults to parallel when the
/// `parallel` feature is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Independent random stream for work item `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f` on `0..len`, keeping index order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..len).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
    }
}

/// Maps `0..len` through `f` and merges the results with the associative
/// `merge`, starting from `identity`.
pub fn map_reduce<T, F, I, M>(exec: Execution, len: u64, f: F, identity: I, merge: M) -> T
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
    I: Fn() -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..len).map(f).fold(identity(), merge),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).reduce(identity, merge)
        }
    }
}
