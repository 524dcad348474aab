//! Execution-mode dispatch for the data-parallel inner loops.
//!
//! Every heavy loop in the crate (Monte Carlo trials, loss-subset
//! enumeration, brute-force pattern sums) is an indexed map followed by an
//! order-preserving reduction. Work items depend only on their index, so
//! the sequential and parallel paths produce bit-identical results and can
//! be compared directly in benchmarks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How to run an indexed map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn indexed_map<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Maps `f` over `0..n` and folds the results in index order.
///
/// The fold itself is always sequential, so floating-point accumulation is
/// independent of the thread count.
pub fn indexed_fold<T, A, F, G>(mode: ExecMode, n: usize, f: F, init: A, fold: G) -> A
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    G: FnMut(A, T) -> A,
{
    // Chunked so parallel runs do not materialize one element per index.
    const CHUNK: usize = 1024;
    let chunks = n.div_ceil(CHUNK);
    let f = &f;
    let partials: Vec<Vec<T>> = indexed_map(mode, chunks, move |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(f).collect()
    });
    partials.into_iter().flatten().fold(init, fold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |i: usize| (i as f64).sqrt();
        let seq = indexed_map(ExecMode::Sequential, 1000, f);
        #[cfg(feature = "parallel")]
        {
            let par = indexed_map(ExecMode::Parallel, 1000, f);
            assert_eq!(seq, par);
        }
        assert_eq!(seq.len(), 1000);
    }

    #[test]
    fn fold_is_order_preserving() {
        let acc = |mode| indexed_fold(mode, 10_000, |i| i as f64 * 1e-3, 0.0, |a, x| a + x);
        let seq = acc(ExecMode::Sequential);
        #[cfg(feature = "parallel")]
        assert_eq!(seq.to_bits(), acc(ExecMode::Parallel).to_bits());
        assert!((seq - 49_995.0).abs() < 1e-9);
    }
}
