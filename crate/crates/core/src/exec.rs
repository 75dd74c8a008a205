/// How amplitude kernels are scheduled.
///
/// `Parallel` splits the amplitude vector into disjoint blocks on the rayon
/// pool. When the crate is built without the `parallel` feature it degrades to
/// the sequential path, so callers never need to branch on the feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run kernels in parallel.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Whether kernels scheduled with `self` will actually use the pool.
    pub fn is_parallel(self) -> bool {
        Self::parallel_available() && self == Execution::Parallel
    }
}

/// Applies `f` to every item of `items`, in parallel when requested.
pub(crate) fn for_each_mut<T: Send, F>(exec: Execution, items: &mut [T], f: F)
where
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        items.par_iter_mut().for_each(f);
        return;
    }
    let _ = exec;
    items.iter_mut().for_each(f);
}

/// Applies `f(offset, chunk)` to consecutive chunks of `data`.
pub(crate) fn for_each_chunk<T: Send, F>(exec: Execution, data: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i * chunk, c));
}

/// Sums `f(offset, chunk)` over consecutive chunks of `data`.
///
/// Chunk partial sums are combined in index order on both paths, so the
/// result is bit-identical between sequential and parallel execution.
pub(crate) fn sum_chunks<T: Sync, R, F>(exec: Execution, data: &[T], chunk: usize, f: F) -> R
where
    R: Send + std::iter::Sum<R> + Default,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        let partial: Vec<R> = data
            .par_chunks(chunk)
            .enumerate()
            .map(|(i, c)| f(i * chunk, c))
            .collect();
        return partial.into_iter().sum();
    }
    let _ = exec;
    data.chunks(chunk)
        .enumerate()
        .map(|(i, c)| f(i * chunk, c))
        .sum()
}

/// Builds a vector of `len` values from `f(index)`.
pub(crate) fn collect_indexed<R: Send, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Chunk length used by reductions and elementwise kernels.
pub(crate) const CHUNK: usize = 1 << 14;
