//! Dense tables over `{0,1}^d` and the fast Walsh–Hadamard transform.

use crate::bits::walsh_scale;
use crate::error::{Error, Result};

/// Largest dimension for which dense `2^d` tables are materialized.
pub const ORACLE_CAP: usize = 25;

/// Real values indexed by the lexicographically ordered elements of `{0,1}^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
    dim: usize,
}

impl DenseVector {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        check_cap(dim, ORACLE_CAP)?;
        if values.len() != 1usize << dim {
            return Err(Error::invalid(format!(
                "dense vector of dimension {dim} needs {} values, got {}",
                1usize << dim,
                values.len()
            )));
        }
        Ok(DenseVector { values, dim })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_cap(dim, ORACLE_CAP)?;
        Ok(DenseVector {
            values: vec![0.0; 1usize << dim],
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

pub(crate) fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if dim > cap {
        return Err(Error::capacity(format!(
            "dimension {dim} exceeds the dense-table cap of {cap}"
        )));
    }
    Ok(())
}

/// Unnormalized in-place Walsh–Hadamard butterfly over a power-of-two slice.
///
/// `out[s] = Σ_x in[x] (-1)^{popcount(s & x)}` with indices read as
/// lexicographic positions.
pub fn butterfly_f64(data: &mut [f64]) {
    debug_assert!(data.len().is_power_of_two());
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// Integer variant of [`butterfly_f64`]; exact for sign-count tables.
pub fn butterfly_i64(data: &mut [i64]) {
    debug_assert!(data.len().is_power_of_two());
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// Orthonormal Walsh transform: `out[s] = Σ_x v[x] χ_s(x)`.
///
/// The unnormalized butterfly runs first and the factor `2^{-d/2}` is applied
/// once at the end. The transform is an involution.
pub fn fwht(v: &DenseVector) -> Result<DenseVector> {
    let mut values = v.values.clone();
    butterfly_f64(&mut values);
    let scale = walsh_scale(v.dim);
    for x in &mut values {
        *x *= scale;
    }
    Ok(DenseVector { values, dim: v.dim })
}
