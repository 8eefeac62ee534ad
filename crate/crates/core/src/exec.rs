//! Sample-sweep execution: data-parallel with rayon when the `parallel`
//! feature (default) is on, sequential otherwise. Results always come back
//! in input order, so parallelism never changes output bytes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map a function over samples, in parallel when available.
#[cfg(feature = "parallel")]
pub fn map_samples<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map a function over samples (sequential build).
#[cfg(not(feature = "parallel"))]
pub fn map_samples<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Sequential mapping, always available (benchmark baseline).
pub fn map_samples_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Cap the global thread pool from the `FINSLER_LAB_THREADS` environment
/// variable. Call once at startup; later calls are ignored by rayon.
pub fn init_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("FINSLER_LAB_THREADS") {
            if let Ok(k) = v.trim().parse::<usize>() {
                if k >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_give_identical_bytes() {
        let items: Vec<u64> = (0..257).collect();
        let f = |x: &u64| (*x as f64).sqrt().to_bits();
        assert_eq!(map_samples(&items, f), map_samples_seq(&items, f));
    }
}
