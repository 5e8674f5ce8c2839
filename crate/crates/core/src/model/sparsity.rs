//! Weak-ℓp diagnostics for coefficient vectors.

use crate::bits::walsh_scale;
use crate::error::{Error, Result};

/// Absolute values sorted non-increasing.
pub fn sorted_magnitudes(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut mags: Vec<f64> = values.into_iter().map(f64::abs).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

/// Smallest `R` with `|θ_(m)| ≤ R m^{-1/p}` for every `m`, i.e. `max_m |θ_(m)| m^{1/p}`.
///
/// `magnitudes` must be nonnegative and sorted non-increasing.
pub fn weak_lp_radius(magnitudes: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::invalid("p must be positive"));
    }
    if magnitudes.iter().any(|m| m.is_nan() || *m < 0.0) {
        return Err(Error::invalid("magnitudes must be nonnegative"));
    }
    if magnitudes.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("magnitudes must be sorted non-increasing"));
    }
    Ok(magnitudes
        .iter()
        .enumerate()
        .map(|(i, m)| m * ((i + 1) as f64).powf(1.0 / p))
        .fold(0.0, f64::max))
}

/// Whether the coefficients of a `d`-dimensional function lie in the
/// weak-ℓp ball of radius `2^{-d/2}`.
pub fn in_sparsity_class(magnitudes: &[f64], dim: usize, p: f64) -> Result<bool> {
    let radius = weak_lp_radius(magnitudes, p)?;
    Ok(radius <= walsh_scale(dim) * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fwht::fwht;
    use crate::model::BernoulliMixture;

    #[test]
    fn uniform_density_radius() {
        let d = 8;
        let mut mags = vec![0.0; 256];
        mags[0] = walsh_scale(d);
        for p in [0.3, 1.0, 2.0] {
            assert_eq!(weak_lp_radius(&mags, p).unwrap(), walsh_scale(d));
            assert!(in_sparsity_class(&mags, d, p).unwrap());
        }
    }

    #[test]
    fn closed_form_power_law() {
        let mags: Vec<f64> = (1..=100).map(|m| 1.0 / (m * m) as f64).collect();
        assert_eq!(weak_lp_radius(&mags, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn density_coefficients_bounded_by_constant_term() {
        let mix = BernoulliMixture::synthetic(&crate::model::MixtureSpec::standard(10, 3)).unwrap();
        let theta = fwht(&mix.dense_table().unwrap()).unwrap();
        let bound = walsh_scale(10);
        assert!(theta
            .values()
            .iter()
            .all(|t| t.abs() <= bound * (1.0 + 1e-12)));
    }

    #[test]
    fn scaling_is_linear() {
        let mags = vec![0.5, 0.3, 0.29, 0.01];
        let r = weak_lp_radius(&mags, 0.7).unwrap();
        let scaled: Vec<f64> = mags.iter().map(|m| m * 3.5).collect();
        let rs = weak_lp_radius(&scaled, 0.7).unwrap();
        assert!((rs - 3.5 * r).abs() < 1e-12 * rs);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(weak_lp_radius(&[0.1, 0.2], 1.0).is_err());
        assert!(weak_lp_radius(&[0.2, 0.1], 0.0).is_err());
        assert!(weak_lp_radius(&[-0.1], 1.0).is_err());
    }
}
