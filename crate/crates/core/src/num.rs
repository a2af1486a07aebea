//! Floating-point helpers: libm shims and deterministic reductions.
//!
//! All transcendental functions are routed through [`libm`], which is pure
//! Rust, so every result is bit-identical across platforms and independent of
//! the host libc.

use alloc::vec::Vec;

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Row chunk size for blocked accumulation. Partial results are produced per
/// chunk and merged with [`reduce_pairwise`], so a sum over rows is a fixed
/// reduction tree: the result does not depend on how the work would be split
/// across workers, only on the row order.
pub(crate) const CHUNK: usize = 256;

/// Sum with a fixed pairwise reduction tree.
pub(crate) fn sum_pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => {
            let mut s = 0.0;
            for &x in xs {
                s += x;
            }
            s
        }
        n => {
            let mid = n / 2;
            sum_pairwise(&xs[..mid]) + sum_pairwise(&xs[mid..])
        }
    }
}

/// Merge per-chunk partial states in a fixed pairwise order.
///
/// `merge(a, b)` must fold `b` into `a`; the tree shape is determined solely
/// by the number of partials.
pub(crate) fn reduce_pairwise<T>(mut parts: Vec<T>, merge: impl Fn(&mut T, T) + Copy) -> Option<T> {
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut iter = parts.into_iter();
        while let Some(mut a) = iter.next() {
            if let Some(b) = iter.next() {
                merge(&mut a, b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop()
}

/// Mean of a slice using the pairwise tree.
pub(crate) fn mean_pairwise(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    sum_pairwise(xs) / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(sum_pairwise(&xs), 15.0);
        assert_eq!(sum_pairwise(&[]), 0.0);
    }

    #[test]
    fn pairwise_sum_of_identical_terms_is_near_exact_multiple() {
        let term = core::f64::consts::LN_2;
        for n in [1usize, 7, 64, 1000, 4097] {
            let xs = vec![term; n];
            let got = sum_pairwise(&xs);
            let want = term * n as f64;
            assert!((got - want).abs() <= 1e-13 * want.abs());
        }
    }

    #[test]
    fn reduce_pairwise_merges_all_parts() {
        let parts: Vec<u64> = (1..=13).collect();
        let total = reduce_pairwise(parts, |a, b| *a += b).unwrap();
        assert_eq!(total, 91);
        assert!(reduce_pairwise(Vec::<u64>::new(), |a, b| *a += b).is_none());
    }
}
