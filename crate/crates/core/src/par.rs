//! Order-preserving batch maps.
//!
//! With the `parallel` feature the work is spread over the rayon pool,
//! otherwise it runs on the calling thread. Outputs always come back in input
//! order and every reduction done on them elsewhere is sequential, so results
//! are bit-identical across both builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Largest value of `f` over `xs`; NaN propagates as +inf.
pub fn max_over<F>(xs: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    fold_max(&map(xs, |&x| f(x)))
}

pub fn max_over_seq<F>(xs: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    fold_max(&map_seq(xs, |&x| f(x)))
}

fn fold_max(vals: &[f64]) -> f64 {
    vals.iter().fold(0.0f64, |acc, &v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            acc.max(v)
        }
    })
}
