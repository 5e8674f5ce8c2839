//! Smallest level constant `α_k` for which the high-probability pruning
//! guarantee holds.

use crate::error::{Error, Result};

fn margin(alpha: f64, k: usize, n: f64, c1: f64, c2: f64) -> f64 {
    let two_k = 2f64.powi(k as i32);
    let a = (alpha / n).sqrt() / 5.0 - (c2 * c2 / (two_k * n)).sqrt();
    n * c1 * (two_k * a * a).min(two_k.sqrt() * a)
}

/// Smallest `α_k` with `n C₁ min(2^k a², 2^{k/2} a) ≥ ln(2^k d / δ)`, where
/// `a = √(α_k/n)/5 − √(C₂²/(2^k n))`.
///
/// The left side grows with `α_k` once `a > 0`, so the answer is found by
/// bisection above `α = 25 C₂² / 2^k`, where `a` vanishes. `C₁` and `C₂` are
/// unknown absolute constants that the caller has to supply.
pub fn complexity_alpha_bound(
    k: usize,
    n: usize,
    d: usize,
    delta: f64,
    c1: f64,
    c2: f64,
) -> Result<f64> {
    if d == 0 || k > d || n == 0 {
        return Err(Error::Infeasible(format!(
            "need 0 <= k <= d, d >= 1, n >= 1 (k={k}, d={d}, n={n})"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Infeasible(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    if !(c1.is_finite() && c1 > 0.0 && c2.is_finite() && c2 >= 0.0) {
        return Err(Error::Infeasible(format!(
            "constants must satisfy C1 > 0, C2 >= 0 (C1={c1}, C2={c2})"
        )));
    }
    let n = n as f64;
    let target = (2f64.powi(k as i32) * d as f64 / delta).ln();
    let holds = |alpha: f64| margin(alpha, k, n, c1, c2) >= target;

    let mut lo = 25.0 * c2 * c2 / 2f64.powi(k as i32);
    let mut hi = if lo > 0.0 { 2.0 * lo } else { 1.0 };
    let mut doublings = 0;
    while !holds(hi) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Infeasible(
                "no finite alpha satisfies the bound".into(),
            ));
        }
    }
    while hi - lo > hi * 1e-14 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn returned_value_is_the_boundary() {
        for (k, n, d, delta) in [
            (10, 1000, 10, 0.1),
            (3, 50, 15, 0.5),
            (1, 100_000, 50, 0.01),
        ] {
            let a = complexity_alpha_bound(k, n, d, delta, 1.0, 1.0).unwrap();
            assert!(a.is_finite() && a > 0.0);
            let target = (2f64.powi(k as i32) * d as f64 / delta).ln();
            assert!(margin(a, k, n as f64, 1.0, 1.0) >= target);
            assert!(margin(0.99 * a, k, n as f64, 1.0, 1.0) < target);
        }
    }

    #[test]
    fn larger_delta_needs_less() {
        let strict = complexity_alpha_bound(10, 1000, 10, 0.5, 1.0, 1.0).unwrap();
        let loose = complexity_alpha_bound(10, 1000, 10, 0.99, 1.0, 1.0).unwrap();
        assert!(strict >= loose);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(complexity_alpha_bound(11, 100, 10, 0.1, 1.0, 1.0).is_err());
        assert!(complexity_alpha_bound(1, 100, 10, 0.0, 1.0, 1.0).is_err());
        assert!(complexity_alpha_bound(1, 100, 10, 0.1, 0.0, 1.0).is_err());
        assert!(complexity_alpha_bound(1, 0, 10, 0.1, 1.0, 1.0).is_err());
    }
}
