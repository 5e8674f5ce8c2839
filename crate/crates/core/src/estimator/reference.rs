//! Slow exhaustive versions of the retained set, for cross-checking the traversal.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::estimator::coefficients::empirical_sign_sums;
use crate::estimator::config::{Comparison, TraversalConfig};
use crate::estimator::schedule::ThresholdSchedule;
use crate::model::Dataset;

/// Largest dimension the exhaustive reference accepts.
pub const REFERENCE_MAX_DIM: usize = 12;

/// The accepting set, evaluated literally: every prefix weight is summed from
/// the dense table of squared empirical coefficients, and each index is kept
/// when all `d` of its prefixes pass. Sums are kept as exact integers
/// (`n θ̂_s 2^{d/2}` is an integer), so thresholds that a weight meets exactly
/// are decided correctly. Honors the Hamming cap, the comparison
/// mode and the leaf override; top-q is not supported.
pub fn retained_set_reference(
    data: &Dataset,
    schedule: &ThresholdSchedule,
    config: &TraversalConfig,
) -> Result<BTreeSet<u64>> {
    let d = data.dim();
    if d > REFERENCE_MAX_DIM {
        return Err(Error::capacity(format!(
            "reference traversal limited to d <= {REFERENCE_MAX_DIM}, got {d}"
        )));
    }
    if config.top_q.is_some() || schedule.top_q().is_some() {
        return Err(Error::invalid("reference traversal has no top-q mode"));
    }
    config.validate(d)?;
    let mut lambdas = schedule.lambdas(d, data.n())?;
    if let Some(leaf) = config.leaf_threshold_override {
        lambdas[d] = leaf;
    }

    let n2 = (data.n() as f64).powi(2);
    let pow = 0.5f64.powi(d as i32);
    // squares[k][u] = Σ_v c²_{uv}, so Ŵ_u = squares[k][u] 2^{-d} / n²
    let mut squares: Vec<Vec<u64>> = vec![Vec::new(); d + 1];
    squares[d] = empirical_sign_sums(data)?
        .iter()
        .map(|c| (c * c) as u64)
        .collect();
    for k in (0..d).rev() {
        squares[k] = squares[k + 1]
            .chunks_exact(2)
            .map(|p| p[0] + p[1])
            .collect();
    }

    let mut out = BTreeSet::new();
    for s in 0..(1u64 << d) {
        if config
            .max_order
            .is_some_and(|m| s.count_ones() as usize > m)
        {
            continue;
        }
        let accepted = (1..=d).all(|k| {
            let u = (s >> (d - k)) as usize;
            config
                .comparison
                .passes(squares[k][u] as f64 * pow / n2, lambdas[k])
        });
        if accepted {
            out.insert(s);
        }
    }
    Ok(out)
}

/// `{s : θ̂²_s ≥ λ}` (or `>` under strict comparison) by brute force over all indices.
pub fn termwise_set(data: &Dataset, lambda: f64, comparison: Comparison) -> Result<BTreeSet<u64>> {
    let pow = 0.5f64.powi(data.dim() as i32);
    let n2 = (data.n() as f64).powi(2);
    Ok(empirical_sign_sums(data)?
        .iter()
        .enumerate()
        .filter(|(_, c)| comparison.passes((*c * *c) as f64 * pow / n2, lambda))
        .map(|(s, _)| s as u64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::rwt_estimate;
    use crate::model::{BernoulliMixture, MixtureSpec};

    fn data(d: usize, n: usize, seed: u64) -> Dataset {
        BernoulliMixture::synthetic(&MixtureSpec::standard(d, seed))
            .unwrap()
            .sample(n, seed + 7)
            .unwrap()
    }

    #[test]
    fn zero_thresholds_accept_everything() {
        let data = data(7, 100, 1);
        let set = retained_set_reference(
            &data,
            &ThresholdSchedule::zero(7),
            &TraversalConfig::default(),
        )
        .unwrap();
        assert_eq!(set.len(), 128);
    }

    #[test]
    fn constant_schedule_is_termwise() {
        for seed in 0..5 {
            let data = data(10, 800, seed);
            let lambda = ThresholdSchedule::constant().lambda(10, 10, 800).unwrap();
            let reference = retained_set_reference(
                &data,
                &ThresholdSchedule::constant(),
                &TraversalConfig::default(),
            )
            .unwrap();
            assert_eq!(
                reference,
                termwise_set(&data, lambda, Comparison::Inclusive).unwrap()
            );
        }
    }

    #[test]
    fn traversal_matches_reference() {
        for seed in 0..20 {
            let data = data(10, 300 + 40 * seed as usize, seed);
            for schedule in [
                ThresholdSchedule::logarithmic(),
                ThresholdSchedule::linear(),
            ] {
                let config = TraversalConfig::default();
                let reference = retained_set_reference(&data, &schedule, &config).unwrap();
                let (est, _) = rwt_estimate(&data, &schedule, &config).unwrap();
                let got: BTreeSet<u64> = est.as_map().keys().copied().collect();
                assert_eq!(got, reference, "seed {seed} {}", schedule.name());
            }
        }
    }

    #[test]
    fn limits() {
        let big = Dataset::from_indices(13, vec![0, 1]).unwrap();
        assert!(retained_set_reference(
            &big,
            &ThresholdSchedule::constant(),
            &TraversalConfig::default()
        )
        .is_err());
        let small = data(5, 20, 1);
        assert!(retained_set_reference(
            &small,
            &ThresholdSchedule::adaptive(2),
            &TraversalConfig::default()
        )
        .is_err());
    }
}
