//! Pairwise (tree) reductions.
//!
//! Every norm and quadrature sum in the crate goes through these helpers, so the
//! reduction order depends only on the input length and never on how the inputs
//! were produced (serial or parallel).

use num_complex::Complex64;

const BLOCK: usize = 32;

/// Pairwise sum of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(x)` over `xs` without materializing the mapped values.
pub fn pairwise_sum_by<T, F: Fn(&T) -> f64 + Copy>(xs: &[T], f: F) -> f64 {
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for x in xs {
            acc += f(x);
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum_by(&xs[..mid], f) + pairwise_sum_by(&xs[mid..], f)
}

/// Pairwise sum of complex values.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= BLOCK {
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum_by(&xs, |x| 2.0 * x), 999_000.0);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum_complex(&[]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn better_than_naive_on_ill_conditioned_input() {
        let xs = vec![0.1; 1 << 20];
        let naive: f64 = xs.iter().sum();
        let exact = 0.1 * (1u64 << 20) as f64;
        assert!((pairwise_sum(&xs) - exact).abs() <= (naive - exact).abs());
    }
}
