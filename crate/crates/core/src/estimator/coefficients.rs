//! Empirical Walsh coefficients and subtree-weight estimators.

use crate::bits::{low_mask, BitVector};
use crate::error::{check_dim, Error, Result};
use crate::estimator::kernel::{
    coefficient_from_sum, energy_to_weight, prefix_bits, sign_of, DirectBlock, SuffixIndex,
    DIRECT_BLOCK_CAP, MAX_BRANCH_BITS,
};
use crate::fwht::{butterfly_i64, check_cap, fwht, DenseVector, ORACLE_CAP};
use crate::model::Dataset;

/// `θ̂_s = (1/n) Σ_i χ_s(X_i)`.
pub fn empirical_coefficient(data: &Dataset, s: &BitVector) -> Result<f64> {
    check_dim(data.dim(), s.len())?;
    let sum: i64 = data.indices().iter().map(|&x| sign_of(x & s.bits())).sum();
    Ok(coefficient_from_sum(sum, data.dim(), data.n()))
}

/// All `2^d` empirical coefficients: the transform of the empirical histogram.
pub fn empirical_coefficients_dense(data: &Dataset) -> Result<DenseVector> {
    fwht(&data.dense_histogram()?)
}

/// Integer sums `c_s = Σ_i (-1)^{s·X_i}` for all `s`, so `θ̂_s = c_s 2^{-d/2} / n` exactly.
pub(crate) fn empirical_sign_sums(data: &Dataset) -> Result<Vec<i64>> {
    let d = data.dim();
    check_cap(d, ORACLE_CAP)?;
    let mut sums = vec![0i64; 1usize << d];
    for &x in data.indices() {
        sums[x as usize] += 1;
    }
    butterfly_i64(&mut sums);
    Ok(sums)
}

/// `Ŵ_u = Σ_v θ̂²_{uv}`, summing the squared coefficients of every suffix
/// extension of `u`.
///
/// All `2^{d-k}` coefficients are produced at once by bucketing the samples on
/// their suffix and transforming the bucket table, in `O(n + (d-k) 2^{d-k})`.
pub fn weight_direct(data: &Dataset, u: &BitVector) -> Result<f64> {
    let d = data.dim();
    let k = u.len();
    if k > d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: k,
        });
    }
    if !DirectBlock::feasible(d, k, data.n()) {
        return Err(Error::capacity(format!(
            "direct weight needs 2^{} coefficients (cap 2^{DIRECT_BLOCK_CAP})",
            d - k
        )));
    }
    let mut samples = data.indices().to_vec();
    samples.sort_unstable();
    let block = DirectBlock::build(d, &samples, u.bits(), k);
    Ok(energy_to_weight(block.total_square_sum(), d, data.n()))
}

/// `Ŵ_u = (1/n²) Σ_i Σ_j χ_u(π_k X_i) χ_u(π_k X_j) I{σ_k X_i = σ_k X_j}`.
///
/// Evaluated literally over all sample pairs with packed-suffix equality, in
/// `O(n²)` word operations. The sum is accumulated in integers, so it is
/// exact. For the empty prefix this is the collision statistic
/// `(1/n²) Σ_i Σ_j I{X_i = X_j}`.
pub fn weight_indirect(data: &Dataset, u: &BitVector) -> Result<f64> {
    let d = data.dim();
    let k = u.len();
    if k > d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: k,
        });
    }
    let suffix_mask = low_mask(d - k);
    let signed: Vec<(u64, i64)> = data
        .indices()
        .iter()
        .map(|&x| (x & suffix_mask, sign_of(prefix_bits(x, d, k) & u.bits())))
        .collect();
    let mut total: i64 = 0;
    for &(si, ci) in &signed {
        let row: i64 = signed
            .iter()
            .filter(|(sj, _)| *sj == si)
            .map(|(_, cj)| *cj)
            .sum();
        total += ci * row;
    }
    Ok(energy_to_weight(total as u64, k, data.n()))
}

/// Weights of all `2^b` extensions `u·e`, `e ∈ {0,1}^b`, from one pass over
/// the samples grouped by their `σ_{k+b}` suffix. Entry `e` (lexicographic)
/// equals `weight_indirect(data, u·e)`.
pub fn child_weights(data: &Dataset, u: &BitVector, b: usize) -> Result<Vec<f64>> {
    let d = data.dim();
    let k = u.len();
    if b == 0 || b > MAX_BRANCH_BITS {
        return Err(Error::capacity(format!(
            "branching exponent {b} outside 1..={MAX_BRANCH_BITS}"
        )));
    }
    if k + b > d {
        return Err(Error::invalid(format!(
            "prefix length {k} plus step {b} exceeds dimension {d}"
        )));
    }
    let index = SuffixIndex::new(data);
    let children = index.child_energies(u.bits(), k, b);
    Ok(children
        .energies
        .iter()
        .map(|&e| energy_to_weight(e, k + b, data.n()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::walsh_eval;
    use crate::model::{BernoulliMixture, MixtureSpec};

    fn data(d: usize, n: usize, seed: u64) -> Dataset {
        let mix = BernoulliMixture::synthetic(&MixtureSpec::standard(d, seed)).unwrap();
        mix.sample(n, seed + 100).unwrap()
    }

    #[test]
    fn zero_index_coefficient_is_exact() {
        let data = data(9, 77, 1);
        let v = empirical_coefficient(&data, &BitVector::zeros(9).unwrap()).unwrap();
        assert_eq!(v, crate::bits::walsh_scale(9));
    }

    #[test]
    fn single_sample_coefficient() {
        let x = BitVector::new(0b1101, 4).unwrap();
        let data = Dataset::new(4, &[x]).unwrap();
        for s in 0..16 {
            let s = BitVector::new(s, 4).unwrap();
            assert_eq!(
                empirical_coefficient(&data, &s).unwrap(),
                walsh_eval(&s, &x).unwrap()
            );
        }
    }

    #[test]
    fn dense_coefficients_match_pointwise() {
        let data = data(6, 500, 2);
        let dense = empirical_coefficients_dense(&data).unwrap();
        for s in 0..64 {
            let v = empirical_coefficient(&data, &BitVector::new(s, 6).unwrap()).unwrap();
            assert!((v - dense.values()[s as usize]).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_weight_endpoints() {
        let data = data(8, 120, 3);
        let s = BitVector::new(0b10010011, 8).unwrap();
        let theta = empirical_coefficient(&data, &s).unwrap();
        let w = weight_direct(&data, &s).unwrap();
        assert!((w - theta * theta).abs() < 1e-15);
        // the empty prefix gives the pairwise collision frequency
        let collisions: f64 =
            data.counts().values().map(|c| (c * c) as f64).sum::<f64>() / (120.0 * 120.0);
        let w0 = weight_direct(&data, &BitVector::empty()).unwrap();
        assert!((w0 - collisions).abs() < 1e-15);
    }

    #[test]
    fn indirect_matches_direct() {
        let data = data(8, 200, 4);
        for bits in [0b000u64, 0b011, 0b101, 0b111] {
            let u = BitVector::new(bits, 3).unwrap();
            let a = weight_indirect(&data, &u).unwrap();
            let b = weight_direct(&data, &u).unwrap();
            assert!((a - b).abs() <= 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn identical_samples() {
        let x = BitVector::new(0b0110101, 7).unwrap();
        let data = Dataset::new(7, &[x; 40]).unwrap();
        for k in 1..=7 {
            let u = BitVector::new(0b1011011 & low_mask(k), k).unwrap();
            let w = weight_indirect(&data, &u).unwrap();
            assert!((w - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn children_add_up() {
        let data = data(9, 250, 5);
        let u = BitVector::new(0b10, 2).unwrap();
        let parent = weight_indirect(&data, &u).unwrap();
        for b in 1..=3 {
            let kids = child_weights(&data, &u, b).unwrap();
            assert_eq!(kids.len(), 1 << b);
            let sum: f64 = kids.iter().sum();
            assert!((sum - parent).abs() <= 1e-10);
            for (e, w) in kids.iter().enumerate() {
                let child = u.concat(&BitVector::new(e as u64, b).unwrap()).unwrap();
                assert!((w - weight_indirect(&data, &child).unwrap()).abs() <= 1e-12);
            }
        }
        assert!(child_weights(&data, &u, 8).is_err());
        assert!(child_weights(&data, &u, 0).is_err());
    }

    #[test]
    fn direct_capacity_error() {
        let data = Dataset::from_indices(40, vec![1, 2, 3]).unwrap();
        assert!(matches!(
            weight_direct(&data, &BitVector::zeros(5).unwrap()),
            Err(Error::Capacity(_))
        ));
    }
}
