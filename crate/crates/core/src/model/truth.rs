use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{walsh_scale, BitVector};
use crate::error::{Error, Result};
use crate::fwht::{check_cap, fwht, DenseVector, ORACLE_CAP};
use crate::model::Dataset;
use crate::rng::{self, tags};

/// Where the reference coefficients of a risk computation come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSource {
    DenseOracle,
    AnalyticMixture,
    SampleBased,
}

/// A density with known Walsh coefficients, used as ground truth.
pub trait GroundTruth: Sync {
    fn dim(&self) -> usize;

    /// `θ_s`.
    fn coefficient(&self, s: &BitVector) -> f64;

    /// `f(x)`.
    fn density(&self, x: &BitVector) -> f64;

    /// `Σ_s θ_s² = Σ_x f(x)²`.
    fn total_energy(&self) -> f64;

    fn source(&self) -> TruthSource;

    /// All `2^d` coefficients in lexicographic order.
    fn dense_coefficients(&self) -> Result<DenseVector> {
        let d = self.dim();
        check_cap(d, ORACLE_CAP)?;
        let values = (0..1u64 << d)
            .map(|s| self.coefficient(&BitVector::from_raw(s, d)))
            .collect();
        DenseVector::new(d, values)
    }
}

/// A density stored as a full table together with its coefficients.
#[derive(Clone, Debug)]
pub struct DenseDensity {
    table: DenseVector,
    coeffs: DenseVector,
}

impl DenseDensity {
    /// Wraps a probability table; it must be nonnegative and sum to 1 within 1e-10.
    pub fn from_table(table: DenseVector) -> Result<Self> {
        if table.values().iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::invalid("density table has negative entries"));
        }
        let total: f64 = table.values().iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("density table sums to {total}")));
        }
        let coeffs = fwht(&table)?;
        Ok(DenseDensity { table, coeffs })
    }

    /// A density whose sorted coefficient magnitudes follow a power law.
    ///
    /// `θ_0 = 2^{-d/2}` and the remaining indices, in a seeded random order,
    /// receive magnitudes `2^{-d/2} m^{-1/p} / H` (`m = 2, …, 2^d`) with random
    /// signs, where `H = Σ_{m ≥ 2} m^{-1/p}`. Dividing by `H` bounds the
    /// oscillating part by the constant term, so the table is nonnegative, and
    /// the coefficient vector lies in the weak-ℓp ball of radius `2^{-d/2}`.
    pub fn power_law(dim: usize, p: f64, seed: u64) -> Result<Self> {
        check_cap(dim, ORACLE_CAP)?;
        if p.is_nan() || p <= 0.0 {
            return Err(Error::invalid("power-law exponent p must be positive"));
        }
        let size = 1usize << dim;
        let radius = walsh_scale(dim);
        let harmonic: f64 = (2..=size).map(|m| (m as f64).powf(-1.0 / p)).sum();
        let mut rng = rng::stream(seed, tags::POWER_LAW, dim as u64);
        let mut order: Vec<usize> = (1..size).collect();
        order.shuffle(&mut rng);
        let mut theta = vec![0.0; size];
        theta[0] = radius;
        for (rank, &s) in order.iter().enumerate() {
            let m = (rank + 2) as f64;
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            theta[s] = sign * radius * m.powf(-1.0 / p) / harmonic;
        }
        let coeffs = DenseVector::new(dim, theta)?;
        let mut table = fwht(&coeffs)?;
        for v in table.values_mut() {
            // rounding only; the construction guarantees f ≥ 0
            *v = v.max(0.0);
        }
        let total: f64 = table.values().iter().sum();
        for v in table.values_mut() {
            *v /= total;
        }
        DenseDensity::from_table(table)
    }

    pub fn table(&self) -> &DenseVector {
        &self.table
    }

    pub fn coefficients(&self) -> &DenseVector {
        &self.coeffs
    }

    /// `n` i.i.d. draws by inverse CDF over the table.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n < 1 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.table.len());
        let mut acc = 0.0;
        for v in self.table.values() {
            acc += v;
            cumulative.push(acc);
        }
        let last = cumulative.len() - 1;
        let mut rng = rng::stream(seed, tags::SAMPLE, 0);
        let samples = (0..n)
            .map(|_| {
                let u = rng.gen::<f64>() * acc;
                cumulative.partition_point(|&c| c <= u).min(last) as u64
            })
            .collect();
        Dataset::from_indices(self.table.dim(), samples)
    }
}

impl GroundTruth for DenseDensity {
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn coefficient(&self, s: &BitVector) -> f64 {
        self.coeffs.values()[s.index()]
    }

    fn density(&self, x: &BitVector) -> f64 {
        self.table.values()[x.index()]
    }

    fn total_energy(&self) -> f64 {
        self.table.sum_of_squares()
    }

    fn source(&self) -> TruthSource {
        TruthSource::DenseOracle
    }

    fn dense_coefficients(&self) -> Result<DenseVector> {
        Ok(self.coeffs.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sparsity::{sorted_magnitudes, weak_lp_radius};

    #[test]
    fn power_law_is_a_density_in_the_class() {
        let f = DenseDensity::power_law(10, 1.0, 5).unwrap();
        let total: f64 = f.table().values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(f.table().values().iter().all(|v| *v >= 0.0));
        let mags = sorted_magnitudes(f.coefficients().values().iter().copied());
        let r = weak_lp_radius(&mags, 1.0).unwrap();
        assert!(r <= walsh_scale(10) * (1.0 + 1e-9));
        // the tail is an exact power law
        let h: f64 = (2..=1024).map(|m| 1.0 / m as f64).sum();
        for m in [2usize, 10, 500, 1024] {
            let expected = walsh_scale(10) / (m as f64 * h);
            assert!((mags[m - 1] - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn dense_truth_rejects_non_densities() {
        let t = DenseVector::new(2, vec![0.5, 0.5, 0.5, -0.5]).unwrap();
        assert!(DenseDensity::from_table(t).is_err());
        let t = DenseVector::new(2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(DenseDensity::from_table(t).is_err());
    }
}
