//! Per-mode parallelism and bit-reproducible reductions.
//!
//! `map_modes` fans a closure out over mode indices, on rayon when the
//! `parallel` feature is enabled and sequentially otherwise. Results come
//! back in index order either way. Sums are always taken with the fixed
//! pairwise tree in `pairwise_sum`, so a norm computed on 8 threads is
//! bit-identical to the sequential one.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const PAIRWISE_BASE: usize = 8;

#[cfg(feature = "parallel")]
pub(crate) fn map_modes<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_modes<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sum with a fixed pairwise reduction tree (order independent of thread
/// count, and more accurate than a left fold on long inputs).
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BASE {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub(crate) fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BASE {
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
    }
}

/// `log(sum(exp(log_terms)))` over finite and `-inf` entries, pairwise inside.
/// Returns `-inf` for an empty or all `-inf` input.
pub(crate) fn log_sum_exp(log_terms: &[f64]) -> f64 {
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max; // empty, all -inf, or a +inf term
    }
    let shifted: Vec<f64> = log_terms.iter().map(|&l| (l - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}
