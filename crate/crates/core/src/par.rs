//! Execution policy for independent evaluations.
//!
//! With the `parallel` feature the parallel policy maps through rayon; without
//! it every map is sequential. Results are always collected in input order,
//! and reductions happen afterwards in that order, so both policies give
//! bit-identical output.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

/// Sets the process-wide policy used by [`map_range`] and [`map_slice`].
pub fn set_exec(exec: Exec) {
    MODE.store(matches!(exec, Exec::Parallel) as u8, Ordering::Relaxed);
}

pub fn exec() -> Exec {
    if MODE.load(Ordering::Relaxed) == 1 && cfg!(feature = "parallel") {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

/// Configures the global worker pool. Only the first call has an effect.
pub fn init_workers(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec() == Exec::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec() == Exec::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_range(100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        let w = map_slice(&v, |x| x + 1);
        assert_eq!(w[99], 99 * 99 + 1);
    }
}
