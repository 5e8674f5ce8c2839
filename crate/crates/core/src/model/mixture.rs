use rand::seq::index::sample as choose_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{walsh_scale, BitVector};
use crate::error::{check_dim, Error, Result};
use crate::fwht::{check_cap, fwht, DenseVector, ORACLE_CAP};
use crate::model::truth::{GroundTruth, TruthSource};
use crate::model::Dataset;
use crate::rng::{self, tags};

/// A finite mixture of product-Bernoulli densities on `{0,1}^d`.
///
/// `components[c][j]` is the probability that component `c` sets `x^(j+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliMixture {
    dim: usize,
    weights: Vec<f64>,
    components: Vec<Vec<f64>>,
}

/// Parameters of the synthetic mixtures used in the experiments: every
/// component has `biased` randomly placed covariates with success probability
/// `bias`; the rest are fair coins. Components are equally weighted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub dim: usize,
    pub components: usize,
    pub biased: usize,
    pub bias: f64,
    pub seed: u64,
}

impl MixtureSpec {
    /// Ten components over `dim` covariates, three of them Bernoulli(0.9).
    pub fn standard(dim: usize, seed: u64) -> Self {
        MixtureSpec {
            dim,
            components: 10,
            biased: 3,
            bias: 0.9,
            seed,
        }
    }
}

impl BernoulliMixture {
    pub fn new(dim: usize, weights: Vec<f64>, components: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || dim > crate::bits::MAX_LEN {
            return Err(Error::invalid(format!("unsupported dimension {dim}")));
        }
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("mixture weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        for row in &components {
            check_dim(dim, row.len())?;
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid("Bernoulli probabilities must lie in [0, 1]"));
            }
        }
        Ok(BernoulliMixture {
            dim,
            weights,
            components,
        })
    }

    /// Draws a synthetic mixture; covariate placement is driven by `spec.seed`.
    pub fn synthetic(spec: &MixtureSpec) -> Result<Self> {
        if spec.components == 0 {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        if spec.biased > spec.dim {
            return Err(Error::invalid(format!(
                "{} biased covariates exceed dimension {}",
                spec.biased, spec.dim
            )));
        }
        if !(0.0..=1.0).contains(&spec.bias) {
            return Err(Error::invalid("bias must lie in [0, 1]"));
        }
        let mut rng = rng::stream(spec.seed, tags::MIXTURE, 0);
        let components = (0..spec.components)
            .map(|_| {
                let mut row = vec![0.5; spec.dim];
                for j in choose_indices(&mut rng, spec.dim, spec.biased) {
                    row[j] = spec.bias;
                }
                row
            })
            .collect();
        let weights = vec![1.0 / spec.components as f64; spec.components];
        // equal weights may miss 1 by an ulp; renormalize against the exact sum
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        BernoulliMixture::new(spec.dim, weights, components)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// `Σ_c w_c Π_j p_{c,j}^{x_j} (1 - p_{c,j})^{1 - x_j}`.
    pub fn density(&self, x: &BitVector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.density_index(x.bits()))
    }

    pub(crate) fn density_index(&self, x: u64) -> f64 {
        let d = self.dim;
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, row)| {
                w * row
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        if (x >> (d - 1 - j)) & 1 == 1 {
                            *p
                        } else {
                            1.0 - p
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    }

    /// Closed-form Walsh coefficient `Σ_c w_c 2^{-d/2} Π_{j: s_j = 1} (1 - 2 p_{c,j})`.
    pub fn walsh_coefficient(&self, s: &BitVector) -> Result<f64> {
        check_dim(self.dim, s.len())?;
        Ok(self.coefficient_index(s.bits()))
    }

    pub(crate) fn coefficient_index(&self, s: u64) -> f64 {
        let d = self.dim;
        let sum: f64 = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, row)| {
                let mut prod = *w;
                let mut rest = s;
                while rest != 0 {
                    let bit = rest.trailing_zeros() as usize;
                    prod *= 1.0 - 2.0 * row[d - 1 - bit];
                    rest &= rest - 1;
                }
                prod
            })
            .sum();
        sum * walsh_scale(d)
    }

    /// `Σ_x f(x)^2` in closed form, summing over component pairs.
    pub fn total_energy(&self) -> f64 {
        let mut total = 0.0;
        for (wa, a) in self.weights.iter().zip(&self.components) {
            for (wb, b) in self.weights.iter().zip(&self.components) {
                let overlap: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(p, q)| p * q + (1.0 - p) * (1.0 - q))
                    .product();
                total += wa * wb * overlap;
            }
        }
        total
    }

    /// Probability that `x^(j)` equals 1, for 1-based `j`.
    pub fn marginal(&self, j: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, row)| w * row[j - 1])
            .sum()
    }

    /// The density at every point of the hypercube.
    pub fn dense_table(&self) -> Result<DenseVector> {
        check_cap(self.dim, ORACLE_CAP)?;
        let size = 1usize << self.dim;
        let mut table = vec![0.0; size];
        let mut scratch = vec![0.0; size];
        for (w, row) in self.weights.iter().zip(&self.components) {
            // grow the product table one covariate at a time, x^(1) most significant
            scratch[0] = *w;
            let mut len = 1;
            for p in row {
                for i in (0..len).rev() {
                    let v = scratch[i];
                    scratch[2 * i] = v * (1.0 - p);
                    scratch[2 * i + 1] = v * p;
                }
                len *= 2;
            }
            for (t, v) in table.iter_mut().zip(&scratch) {
                *t += v;
            }
        }
        DenseVector::new(self.dim, table)
    }

    /// `n` i.i.d. draws: a component by inverse CDF on the weights, then
    /// independent coordinates. Deterministic given `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n < 1 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        let mut rng = rng::stream(seed, tags::SAMPLE, 0);
        let mut cumulative = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w;
            cumulative.push(acc);
        }
        let last = self.weights.len() - 1;
        let samples = (0..n)
            .map(|_| {
                let u: f64 = rng.gen::<f64>() * acc;
                let c = cumulative.partition_point(|&cdf| cdf <= u).min(last);
                self.components[c]
                    .iter()
                    .fold(0u64, |x, p| (x << 1) | u64::from(rng.gen::<f64>() < *p))
            })
            .collect();
        Dataset::from_indices(self.dim, samples)
    }
}

impl GroundTruth for BernoulliMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coefficient(&self, s: &BitVector) -> f64 {
        self.coefficient_index(s.bits())
    }

    fn density(&self, x: &BitVector) -> f64 {
        self.density_index(x.bits())
    }

    fn total_energy(&self) -> f64 {
        BernoulliMixture::total_energy(self)
    }

    fn source(&self) -> TruthSource {
        TruthSource::AnalyticMixture
    }

    fn dense_coefficients(&self) -> Result<DenseVector> {
        fwht(&self.dense_table()?)
    }
}

/// `Σ_c w_c Π_j p_{c,j}^{x_j}(1 - p_{c,j})^{1 - x_j}`.
pub fn mixture_density(mix: &BernoulliMixture, x: &BitVector) -> Result<f64> {
    mix.density(x)
}

pub fn mixture_walsh_coefficient(mix: &BernoulliMixture, s: &BitVector) -> Result<f64> {
    mix.walsh_coefficient(s)
}
