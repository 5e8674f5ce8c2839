use std::collections::HashMap;

use crate::bits::{BitVector, MAX_LEN};
use crate::error::{check_dim, Error, Result};
use crate::fwht::{check_cap, DenseVector, ORACLE_CAP};

/// An immutable sample `X_1, …, X_n` from a density on `{0,1}^d`.
///
/// Samples are stored as lexicographic indices (see [`BitVector`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    dim: usize,
    samples: Vec<u64>,
}

impl Dataset {
    pub fn new(dim: usize, samples: &[BitVector]) -> Result<Self> {
        for x in samples {
            check_dim(dim, x.len())?;
        }
        Dataset::from_indices(dim, samples.iter().map(|x| x.bits()).collect())
    }

    /// Builds a dataset from lexicographic indices.
    pub fn from_indices(dim: usize, samples: Vec<u64>) -> Result<Self> {
        if dim == 0 || dim > MAX_LEN {
            return Err(Error::invalid(format!(
                "dimension must lie in 1..={MAX_LEN}, got {dim}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if samples.len() > u32::MAX as usize {
            return Err(Error::capacity("more than 2^32 samples"));
        }
        let mask = crate::bits::low_mask(dim);
        if let Some(bad) = samples.iter().find(|&&x| x & !mask != 0) {
            return Err(Error::invalid(format!(
                "sample index {bad:#x} does not fit in {dim} bits"
            )));
        }
        Ok(Dataset { dim, samples })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Lexicographic indices of the samples, in insertion order.
    pub fn indices(&self) -> &[u64] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> BitVector {
        BitVector::from_raw(self.samples[i], self.dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = BitVector> + '_ {
        self.samples
            .iter()
            .map(move |&x| BitVector::from_raw(x, self.dim))
    }

    /// Occurrence count of every distinct sample.
    pub fn counts(&self) -> HashMap<u64, u64> {
        let mut counts = HashMap::new();
        for &x in &self.samples {
            *counts.entry(x).or_insert(0) += 1;
        }
        counts
    }

    /// Empirical frequencies as a dense table (dimension at most [`ORACLE_CAP`]).
    pub fn dense_histogram(&self) -> Result<DenseVector> {
        check_cap(self.dim, ORACLE_CAP)?;
        let mut table = DenseVector::zeros(self.dim)?;
        let inv = 1.0 / self.n() as f64;
        let values = table.values_mut();
        for &x in &self.samples {
            values[x as usize] += inv;
        }
        Ok(table)
    }

    /// Frequency of 1 at each component, `x^(1)` first.
    pub fn marginals(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.dim)
            .map(|j| {
                let shift = self.dim - 1 - j;
                self.samples
                    .iter()
                    .filter(|&&x| (x >> shift) & 1 == 1)
                    .count() as f64
                    / n
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Dataset::from_indices(3, vec![]),
            Err(Error::EmptyDataset)
        ));
        assert!(Dataset::from_indices(0, vec![0]).is_err());
        assert!(Dataset::from_indices(3, vec![8]).is_err());
        let x: BitVector = "0101".parse().unwrap();
        assert!(matches!(
            Dataset::new(3, &[x]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn histogram_and_marginals() {
        let data = Dataset::from_indices(2, vec![0b10, 0b10, 0b11, 0b00]).unwrap();
        let h = data.dense_histogram().unwrap();
        assert_eq!(h.values(), &[0.25, 0.0, 0.5, 0.25]);
        assert_eq!(data.marginals(), vec![0.75, 0.25]);
        assert_eq!(data.sample(2).to_string(), "11");
    }
}
