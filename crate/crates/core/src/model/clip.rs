//! Turning a Walsh expansion into a bona fide probability mass function.

use rand::Rng;

use crate::bits::{low_mask, BitVector};
use crate::error::{check_dim, Error, Result};
use crate::fwht::DenseVector;
use crate::model::SparseDensity;
use crate::rng::{self, tags};

/// Default number of uniform points for Monte-Carlo renormalization.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClipMode {
    /// Enumerate the whole hypercube.
    Exact,
    /// Estimate the normalizer from uniformly drawn points.
    MonteCarlo { samples: usize, seed: u64 },
}

/// The clipped and renormalized estimate `max(f̂, 0) / Z`.
#[derive(Clone, Debug)]
pub enum ClippedDensity {
    Dense {
        table: DenseVector,
        normalizer: f64,
    },
    Implicit {
        estimate: SparseDensity,
        normalizer: f64,
    },
}

impl ClippedDensity {
    /// `Z`, exact or estimated.
    pub fn normalizer(&self) -> f64 {
        match self {
            ClippedDensity::Dense { normalizer, .. }
            | ClippedDensity::Implicit { normalizer, .. } => *normalizer,
        }
    }

    pub fn eval(&self, x: &BitVector) -> Result<f64> {
        match self {
            ClippedDensity::Dense { table, .. } => {
                check_dim(table.dim(), x.len())?;
                Ok(table.values()[x.index()])
            }
            ClippedDensity::Implicit {
                estimate,
                normalizer,
            } => Ok(estimate.eval(x)?.max(0.0) / normalizer),
        }
    }
}

pub fn clip_and_renormalize(f: &SparseDensity, mode: ClipMode) -> Result<ClippedDensity> {
    match mode {
        ClipMode::Exact => {
            let mut table = f.to_dense_table()?;
            let values = table.values_mut();
            for v in values.iter_mut() {
                *v = v.max(0.0);
            }
            let z: f64 = values.iter().sum();
            if z <= 0.0 {
                return Err(Error::ZeroNormalization);
            }
            for v in values.iter_mut() {
                *v /= z;
            }
            Ok(ClippedDensity::Dense {
                table,
                normalizer: z,
            })
        }
        ClipMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("Monte-Carlo renormalization needs samples"));
            }
            let d = f.dim();
            let mask = low_mask(d);
            let mut rng = rng::stream(seed, tags::MONTE_CARLO, 0);
            let total: f64 = (0..samples)
                .map(|_| f.eval_index(rng.gen::<u64>() & mask).max(0.0))
                .sum();
            let z = (total / samples as f64) * 2f64.powi(d as i32);
            if z <= 0.0 {
                return Err(Error::ZeroNormalization);
            }
            Ok(ClippedDensity::Implicit {
                estimate: f.clone(),
                normalizer: z,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::walsh_scale;

    #[test]
    fn valid_density_is_unchanged() {
        let mut f = SparseDensity::new(4).unwrap();
        f.insert(BitVector::zeros(4).unwrap(), walsh_scale(4))
            .unwrap();
        let g = clip_and_renormalize(&f, ClipMode::Exact).unwrap();
        assert!((g.normalizer() - 1.0).abs() < 1e-15);
        for x in 0..16 {
            let v = g.eval(&BitVector::new(x, 4).unwrap()).unwrap();
            assert!((v - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_parts_are_clipped() {
        let mut f = SparseDensity::new(3).unwrap();
        f.insert(BitVector::zeros(3).unwrap(), walsh_scale(3))
            .unwrap();
        f.insert(BitVector::new(0b011, 3).unwrap(), 0.9).unwrap();
        let g = clip_and_renormalize(&f, ClipMode::Exact).unwrap();
        let ClippedDensity::Dense { table, .. } = &g else {
            panic!("exact mode yields a table")
        };
        assert!(table.values().iter().all(|v| *v >= 0.0));
        assert!((table.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_negative_is_an_error() {
        let mut f = SparseDensity::new(3).unwrap();
        f.insert(BitVector::zeros(3).unwrap(), -0.1).unwrap();
        assert!(matches!(
            clip_and_renormalize(&f, ClipMode::Exact),
            Err(Error::ZeroNormalization)
        ));
        assert!(matches!(
            clip_and_renormalize(
                &f,
                ClipMode::MonteCarlo {
                    samples: 100,
                    seed: 1
                }
            ),
            Err(Error::ZeroNormalization)
        ));
    }
}
