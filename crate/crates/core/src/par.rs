//! Data-parallel helpers. With the `parallel` feature (default) work is
//! spread over the rayon pool; without it, or with
//! [`Parallelism::Sequential`], everything runs on the calling thread.
//! Results are always returned in input order.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Use the thread pool when the crate is built with `parallel`.
    #[default]
    Auto,
    Sequential,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Auto
    }
}

/// `items.iter().map(f)`, order preserving.
pub fn map<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// `range.filter_map(f)`, order preserving.
pub fn filter_map_range<R, F>(par: Parallelism, range: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().filter_map(f).collect();
    }
    let _ = par;
    range.filter_map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Parallelism::Auto, &xs, |x| x * x);
        let b = map(Parallelism::Sequential, &xs, |x| x * x);
        assert_eq!(a, b);
        let f = |k: u64| (k % 7 == 0).then_some(k);
        assert_eq!(
            filter_map_range(Parallelism::Auto, 0..5000, f),
            filter_map_range(Parallelism::Sequential, 0..5000, f)
        );
    }
}
