//! Execution strategy for the data-parallel inner loops.
//!
//! Every kernel in the crate writes disjoint output rows (or disjoint sweep
//! entries) and reads shared inputs, so the parallel and sequential paths
//! produce bit-identical results.

/// How row loops and sweeps are scheduled.
/// Defaults to `Parallel` when the `parallel` feature is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Rayon work-stealing over rows; only with the `parallel` feature.
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// Calls `f(row_index, row)` for each `width`-sized chunk of `out`.
    pub(crate) fn for_each_row<F>(self, out: &mut [f64], width: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        match self {
            Execution::Sequential => out
                .chunks_mut(width)
                .enumerate()
                .for_each(|(y, row)| f(y, row)),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                out.par_chunks_mut(width)
                    .enumerate()
                    .for_each(|(y, row)| f(y, row))
            }
        }
    }

    /// Order-preserving map over a slice.
    pub(crate) fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }
}
