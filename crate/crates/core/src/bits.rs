//! Packed binary strings and the Walsh basis on the hypercube.
//!
//! A [`BitVector`] of length `k` stores component `x^(1)` in the most
//! significant of its `k` low bits, so the packed value is exactly the
//! position of the string in the lexicographic order of `{0,1}^k`. Prefixes
//! are right shifts, suffixes are masks, and concatenation is shift-or.

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest supported string.
pub const MAX_LEN: usize = 64;

/// Mask selecting the `len` low bits of a word.
#[inline]
pub fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// `2^{-k/2}`, the normalization of a Walsh function on `{0,1}^k`.
#[inline]
pub fn walsh_scale(k: usize) -> f64 {
    let even = 0.5f64.powi((k / 2) as i32);
    if k % 2 == 1 {
        even * FRAC_1_SQRT_2
    } else {
        even
    }
}

/// Reverses the `len` low bits of `value`.
#[inline]
pub fn reverse_low_bits(value: u64, len: usize) -> u64 {
    if len == 0 {
        0
    } else {
        value.reverse_bits() >> (64 - len)
    }
}

/// A binary string of explicit length, packed into one machine word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    bits: u64,
    len: u8,
}

impl BitVector {
    /// Builds a string of length `len` whose lexicographic index is `bits`.
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::invalid(format!(
                "bit string length {len} exceeds {MAX_LEN}"
            )));
        }
        if bits & !low_mask(len) != 0 {
            return Err(Error::invalid(format!(
                "value {bits:#x} has bits set beyond length {len}"
            )));
        }
        Ok(BitVector {
            bits,
            len: len as u8,
        })
    }

    /// Unchecked constructor for internal hot paths. Bits above `len` are dropped.
    #[inline]
    pub(crate) fn from_raw(bits: u64, len: usize) -> Self {
        debug_assert!(len <= MAX_LEN);
        BitVector {
            bits: bits & low_mask(len),
            len: len as u8,
        }
    }

    pub fn empty() -> Self {
        BitVector { bits: 0, len: 0 }
    }

    pub fn zeros(len: usize) -> Result<Self> {
        BitVector::new(0, len)
    }

    pub fn ones(len: usize) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::invalid(format!("length {len} exceeds {MAX_LEN}")));
        }
        BitVector::new(low_mask(len), len)
    }

    /// Builds a string from its components, `x^(1)` first.
    pub fn from_bools(components: &[bool]) -> Result<Self> {
        if components.len() > MAX_LEN {
            return Err(Error::invalid(format!(
                "length {} exceeds {MAX_LEN}",
                components.len()
            )));
        }
        let bits = components
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        Ok(BitVector::from_raw(bits, components.len()))
    }

    /// Lexicographic index of the string within `{0,1}^len`.
    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Component `x^(j)` using 1-based indexing.
    pub fn get(&self, j: usize) -> Result<bool> {
        if j == 0 || j > self.len() {
            return Err(Error::invalid(format!(
                "component {j} out of range 1..={}",
                self.len()
            )));
        }
        Ok((self.bits >> (self.len() - j)) & 1 == 1)
    }

    /// Number of ones.
    #[inline]
    pub fn hamming_weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Parity of `self · other`, i.e. `popcount(self AND other) mod 2`.
    pub fn dot_parity(&self, other: &BitVector) -> Result<u32> {
        crate::error::check_dim(self.len(), other.len())?;
        Ok((self.bits & other.bits).count_ones() & 1)
    }

    /// The juxtaposition `self other`.
    pub fn concat(&self, other: &BitVector) -> Result<BitVector> {
        let len = self.len() + other.len();
        if len > MAX_LEN {
            return Err(Error::invalid(format!(
                "concatenated length {len} exceeds {MAX_LEN}"
            )));
        }
        let high = if other.len() == 64 {
            0
        } else {
            self.bits << other.len()
        };
        Ok(BitVector::from_raw(high | other.bits, len))
    }

    /// Appends one component at the end.
    pub fn push(&self, bit: bool) -> Result<BitVector> {
        self.concat(&BitVector::from_raw(u64::from(bit), 1))
    }

    /// The first `k` components.
    pub fn prefix(&self, k: usize) -> Result<BitVector> {
        self.check_split(k)?;
        let shift = self.len() - k;
        let bits = if shift == 64 { 0 } else { self.bits >> shift };
        Ok(BitVector::from_raw(bits, k))
    }

    /// The last `len - k` components.
    pub fn suffix(&self, k: usize) -> Result<BitVector> {
        self.check_split(k)?;
        let rest = self.len() - k;
        Ok(BitVector::from_raw(self.bits & low_mask(rest), rest))
    }

    fn check_split(&self, k: usize) -> Result<()> {
        if k > self.len() {
            Err(Error::invalid(format!(
                "split point {k} out of range 0..={}",
                self.len()
            )))
        } else {
            Ok(())
        }
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shorter strings first, then lexicographic.
impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in (0..self.len()).rev() {
            f.write_str(if (self.bits >> j) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(\"{self}\")")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > MAX_LEN {
            return Err(Error::invalid(format!(
                "bit string of length {} exceeds {MAX_LEN}",
                s.len()
            )));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::invalid(format!(
                            "unexpected character {other:?} in bit string"
                        )))
                    }
                };
        }
        Ok(BitVector::from_raw(bits, s.len()))
    }
}

/// Evaluates the Walsh function `χ_s(x) = 2^{-k/2} (-1)^{s·x}`.
///
/// The empty string is accepted and yields the empty product, 1.
pub fn walsh_eval(s: &BitVector, x: &BitVector) -> Result<f64> {
    let parity = s.dot_parity(x)?;
    let scale = walsh_scale(s.len());
    Ok(if parity == 0 { scale } else { -scale })
}

/// Checks `χ_s(x) == χ_{π_l(s)}(π_l(x)) · χ_{σ_l(s)}(σ_l(x))` to 1e-12 relative.
pub fn walsh_factorization_check(s: &BitVector, l: usize, x: &BitVector) -> Result<bool> {
    crate::error::check_dim(s.len(), x.len())?;
    if l == 0 || l > s.len() {
        return Err(Error::invalid(format!(
            "split point {l} out of range 1..={}",
            s.len()
        )));
    }
    let whole = walsh_eval(s, x)?;
    let head = walsh_eval(&s.prefix(l)?, &x.prefix(l)?)?;
    let tail = walsh_eval(&s.suffix(l)?, &x.suffix(l)?)?;
    let product = head * tail;
    Ok((whole - product).abs() <= 1e-12 * whole.abs().max(product.abs()))
}
