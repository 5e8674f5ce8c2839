use std::collections::BTreeMap;

use crate::bits::{walsh_scale, BitVector};
use crate::error::{check_dim, Error, Result};
use crate::fwht::{check_cap, fwht, DenseVector, ORACLE_CAP};

/// A finite Walsh expansion `f̂ = Σ_s θ̂_s χ_s` over `{0,1}^d`.
///
/// Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseDensity {
    dim: usize,
    coeffs: BTreeMap<u64, f64>,
}

impl SparseDensity {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > crate::bits::MAX_LEN {
            return Err(Error::invalid(format!("unsupported dimension {dim}")));
        }
        Ok(SparseDensity {
            dim,
            coeffs: BTreeMap::new(),
        })
    }

    /// Collects `(index, coefficient)` pairs; later duplicates overwrite earlier ones.
    pub fn from_pairs(
        dim: usize,
        pairs: impl IntoIterator<Item = (BitVector, f64)>,
    ) -> Result<Self> {
        let mut out = SparseDensity::new(dim)?;
        for (s, v) in pairs {
            out.insert(s, v)?;
        }
        Ok(out)
    }

    /// Every coefficient of a dense coefficient vector, zeros dropped.
    pub fn from_dense_coefficients(theta: &DenseVector) -> Self {
        let coeffs = theta
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(s, v)| (s as u64, *v))
            .collect();
        SparseDensity {
            dim: theta.dim(),
            coeffs,
        }
    }

    pub(crate) fn from_raw_map(dim: usize, coeffs: BTreeMap<u64, f64>) -> Self {
        debug_assert!(coeffs.values().all(|v| *v != 0.0));
        SparseDensity { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stores `θ̂_s`; a zero value removes the entry.
    pub fn insert(&mut self, s: BitVector, value: f64) -> Result<()> {
        check_dim(self.dim, s.len())?;
        if !value.is_finite() {
            return Err(Error::invalid(format!("coefficient for {s} is not finite")));
        }
        if value == 0.0 {
            self.coeffs.remove(&s.bits());
        } else {
            self.coeffs.insert(s.bits(), value);
        }
        Ok(())
    }

    /// Stored coefficient, or 0 when absent.
    pub fn get(&self, s: &BitVector) -> f64 {
        if s.len() != self.dim {
            return 0.0;
        }
        self.coeffs.get(&s.bits()).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, s: &BitVector) -> bool {
        s.len() == self.dim && self.coeffs.contains_key(&s.bits())
    }

    /// Coefficients in lexicographic order of their index.
    pub fn iter(&self) -> impl Iterator<Item = (BitVector, f64)> + '_ {
        self.coeffs
            .iter()
            .map(move |(&s, &v)| (BitVector::from_raw(s, self.dim), v))
    }

    pub fn keys(&self) -> impl Iterator<Item = BitVector> + '_ {
        self.iter().map(|(s, _)| s)
    }

    pub fn as_map(&self) -> &BTreeMap<u64, f64> {
        &self.coeffs
    }

    /// `Σ θ̂_s²`, the squared L² norm of the expansion.
    pub fn energy(&self) -> f64 {
        self.coeffs.values().map(|v| v * v).sum()
    }

    /// `f̂(x)`, summed over the stored coefficients only.
    pub fn eval(&self, x: &BitVector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval_index(x.bits()))
    }

    #[inline]
    pub(crate) fn eval_index(&self, x: u64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .map(|(&s, &v)| if (s & x).count_ones() & 1 == 0 { v } else { -v })
            .sum();
        sum * walsh_scale(self.dim)
    }

    /// Coefficients as a dense vector indexed by `s`.
    pub fn to_dense_coefficients(&self) -> Result<DenseVector> {
        check_cap(self.dim, ORACLE_CAP)?;
        let mut theta = DenseVector::zeros(self.dim)?;
        let values = theta.values_mut();
        for (&s, &v) in &self.coeffs {
            values[s as usize] = v;
        }
        Ok(theta)
    }

    /// `f̂(x)` at every point of the hypercube.
    pub fn to_dense_table(&self) -> Result<DenseVector> {
        fwht(&self.to_dense_coefficients()?)
    }
}

/// `f̂(x) = Σ θ̂_s χ_s(x)`.
pub fn eval_density(f: &SparseDensity, x: &BitVector) -> Result<f64> {
    f.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_density() {
        for d in [1, 4, 9, 33] {
            let mut f = SparseDensity::new(d).unwrap();
            f.insert(BitVector::zeros(d).unwrap(), walsh_scale(d))
                .unwrap();
            let x = BitVector::new(1, d).unwrap();
            let v = f.eval(&x).unwrap();
            assert!((v - 0.5f64.powi(d as i32)).abs() < 1e-15 * 0.5f64.powi(d as i32));
        }
    }

    #[test]
    fn empty_is_zero() {
        let f = SparseDensity::new(5).unwrap();
        assert_eq!(f.eval(&BitVector::new(3, 5).unwrap()).unwrap(), 0.0);
        assert!(f.eval(&BitVector::new(3, 4).unwrap()).is_err());
    }

    #[test]
    fn zeros_are_not_stored() {
        let mut f = SparseDensity::new(3).unwrap();
        let s = BitVector::new(5, 3).unwrap();
        f.insert(s, 0.2).unwrap();
        assert_eq!(f.len(), 1);
        f.insert(s, 0.0).unwrap();
        assert!(f.is_empty());
        assert!(f.insert(s, f64::NAN).is_err());
    }

    #[test]
    fn matches_dense_table_oracle() {
        let d = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut table: Vec<f64> = (0..16).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = table.iter().sum();
        table.iter_mut().for_each(|v| *v /= total);
        let table = DenseVector::new(d, table).unwrap();
        let theta = fwht(&table).unwrap();
        let f = SparseDensity::from_dense_coefficients(&theta);
        for x in 0..16u64 {
            let got = f.eval(&BitVector::new(x, d).unwrap()).unwrap();
            assert!((got - table.values()[x as usize]).abs() < 1e-12);
        }
        let back = f.to_dense_table().unwrap();
        for (a, b) in back.values().iter().zip(table.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
