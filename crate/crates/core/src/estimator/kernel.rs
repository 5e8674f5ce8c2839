//! Integer kernels behind the subtree-weight estimates.
//!
//! Every weight is kept as an exact integer "energy" `S` at a tree level `ℓ`,
//! with `Ŵ = S · 2^{-ℓ} / n²`. For a prefix `u` of length `ℓ`,
//! `S = Σ_g (Σ_{i ∈ g} (-1)^{u·π_ℓ(X_i)})²`, where `g` runs over the classes of
//! samples sharing the suffix `σ_ℓ(X_i)`; this is the pairwise collision sum
//! of the indirect estimator regrouped by suffix. Sums of child energies equal
//! `2^t` times the parent energy exactly, so all routes to a weight produce
//! the same floating-point value.

use crate::bits::{low_mask, reverse_low_bits, walsh_scale};
use crate::fwht::{butterfly_i64, ORACLE_CAP};
use crate::model::Dataset;

/// Largest suffix length handled by a direct block.
pub const DIRECT_BLOCK_CAP: usize = ORACLE_CAP;

/// Largest per-step branching exponent `b` (so `N = 2^b ≤ 65536`).
pub const MAX_BRANCH_BITS: usize = 16;

#[inline]
pub(crate) fn prefix_bits(x: u64, d: usize, k: usize) -> u64 {
    if k == 0 {
        0
    } else {
        x >> (d - k)
    }
}

#[inline]
pub(crate) fn sign_of(parity_word: u64) -> i64 {
    if parity_word.count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `Ŵ = S · 2^{-level} / n²`.
#[inline]
pub(crate) fn energy_to_weight(energy: u64, level: usize, n: usize) -> f64 {
    let n = n as f64;
    energy as f64 * 0.5f64.powi(level as i32) / (n * n)
}

/// `θ̂ = c · 2^{-d/2} / n` for an integer sign sum `c`.
#[inline]
pub(crate) fn coefficient_from_sum(sum: i64, d: usize, n: usize) -> f64 {
    sum as f64 / n as f64 * walsh_scale(d)
}

/// Child energies of one node, plus signed coefficient sums at the leaf level.
pub(crate) struct ChildEnergies {
    pub energies: Vec<u64>,
    pub leaf_sums: Option<Vec<i64>>,
}

/// Samples sorted so that every suffix class is a contiguous run, at every level.
pub(crate) struct SuffixIndex {
    dim: usize,
    sorted: Vec<u64>,
}

impl SuffixIndex {
    pub fn new(data: &Dataset) -> Self {
        let d = data.dim();
        let mut sorted = data.indices().to_vec();
        // ordering by the reversed string puts x^(d) most significant, so any
        // suffix σ_ℓ is a leading block of the sort key
        sorted.sort_unstable_by_key(|&x| reverse_low_bits(x, d));
        SuffixIndex { dim: d, sorted }
    }

    /// Energies of the `2^t` extensions `u·e` of the length-`k` prefix `u`.
    pub fn child_energies(&self, u: u64, k: usize, t: usize) -> ChildEnergies {
        let d = self.dim;
        debug_assert!(t >= 1 && k + t <= d && t <= MAX_BRANCH_BITS);
        let width = 1usize << t;
        let suffix_len = d - k - t;
        let suffix_mask = low_mask(suffix_len);
        let mid_mask = low_mask(t);

        let mut hist = vec![0i64; width];
        let mut scratch = vec![0i64; width];
        let mut mark = vec![u32::MAX; width];
        let mut touched: Vec<usize> = Vec::with_capacity(width.min(64));
        let mut acc = vec![0u64; width];
        let mut shared = 0u64;
        let mut group_id = 0u32;

        let mut flush = |hist: &mut Vec<i64>,
                         touched: &mut Vec<usize>,
                         acc: &mut Vec<u64>,
                         shared: &mut u64| {
            match touched.len() {
                0 => {}
                1 => {
                    let h = hist[touched[0]];
                    *shared += (h * h) as u64;
                }
                len if len < t => {
                    for (e, slot) in acc.iter_mut().enumerate() {
                        let s: i64 = touched
                            .iter()
                            .map(|&m| hist[m] * sign_of((e & m) as u64))
                            .sum();
                        *slot += (s * s) as u64;
                    }
                }
                _ => {
                    scratch.copy_from_slice(hist);
                    butterfly_i64(&mut scratch);
                    for (slot, s) in acc.iter_mut().zip(&scratch) {
                        *slot += (s * s) as u64;
                    }
                }
            }
            for &m in touched.iter() {
                hist[m] = 0;
            }
            touched.clear();
        };

        let mut prev: Option<u64> = None;
        for &x in &self.sorted {
            if let Some(p) = prev {
                if (p ^ x) & suffix_mask != 0 {
                    flush(&mut hist, &mut touched, &mut acc, &mut shared);
                    group_id += 1;
                }
            }
            prev = Some(x);
            let sign = sign_of(prefix_bits(x, d, k) & u);
            let mid = ((x >> suffix_len) & mid_mask) as usize;
            if mark[mid] != group_id {
                mark[mid] = group_id;
                touched.push(mid);
            }
            hist[mid] += sign;
        }

        if suffix_len == 0 {
            // a single suffix class: keep the signed transform for the leaves
            let mut sums = hist.clone();
            butterfly_i64(&mut sums);
            let energies = sums.iter().map(|s| (s * s) as u64).collect();
            return ChildEnergies {
                energies,
                leaf_sums: Some(sums),
            };
        }
        flush(&mut hist, &mut touched, &mut acc, &mut shared);
        for slot in &mut acc {
            *slot += shared;
        }
        ChildEnergies {
            energies: acc,
            leaf_sums: None,
        }
    }

    /// Energy of the length-`k` prefix `u` itself.
    pub fn energy(&self, u: u64, k: usize) -> u64 {
        let d = self.dim;
        let suffix_mask = low_mask(d - k);
        let mut total = 0u64;
        let mut run = 0i64;
        let mut prev: Option<u64> = None;
        for &x in &self.sorted {
            if let Some(p) = prev {
                if (p ^ x) & suffix_mask != 0 {
                    total += (run * run) as u64;
                    run = 0;
                }
            }
            prev = Some(x);
            run += sign_of(prefix_bits(x, d, k) & u);
        }
        total + (run * run) as u64
    }

    /// Signed coefficient sums `c_{uv}` for every suffix `v` of the prefix `u`.
    pub fn block(&self, u: u64, k: usize) -> DirectBlock {
        DirectBlock::build(self.dim, &self.sorted, u, k)
    }
}

/// All empirical coefficients under one prefix, computed directly.
pub(crate) struct DirectBlock {
    level: usize,
    dim: usize,
    sums: Vec<i64>,
    cumulative: Vec<u64>,
}

impl DirectBlock {
    pub fn build(d: usize, samples: &[u64], u: u64, k: usize) -> Self {
        let len = d - k;
        debug_assert!(len <= DIRECT_BLOCK_CAP);
        let mask = low_mask(len);
        let mut sums = vec![0i64; 1usize << len];
        for &x in samples {
            sums[(x & mask) as usize] += sign_of(prefix_bits(x, d, k) & u);
        }
        butterfly_i64(&mut sums);
        let mut cumulative = Vec::with_capacity(sums.len() + 1);
        let mut acc = 0u64;
        cumulative.push(0);
        for s in &sums {
            acc += (s * s) as u64;
            cumulative.push(acc);
        }
        DirectBlock {
            level: k,
            dim: d,
            sums,
            cumulative,
        }
    }

    /// Whether a block below level `k` fits the size and integer-range limits.
    pub fn feasible(d: usize, k: usize, n: usize) -> bool {
        let len = d - k;
        if len > DIRECT_BLOCK_CAP {
            return false;
        }
        let n2 = (n as u128) * (n as u128);
        (n2 << len) < (1u128 << 63)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Sum of `c²` over every leaf, i.e. `2^{d-k}` times the block-root energy.
    pub fn total_square_sum(&self) -> u64 {
        *self.cumulative.last().unwrap()
    }

    /// Child energies of the node with block-local prefix `local` at level `level`.
    pub fn child_energies(&self, local: u64, level: usize, t: usize) -> ChildEnergies {
        let d = self.dim;
        let child_level = level + t;
        let span = d - child_level;
        let first = (local << t) as usize;
        let width = 1usize << t;
        let energies = (0..width)
            .map(|e| {
                let lo = (first + e) << span;
                let hi = (first + e + 1) << span;
                let e2 = self.cumulative[hi] - self.cumulative[lo];
                debug_assert_eq!(e2 & low_mask(span), 0);
                e2 >> span
            })
            .collect();
        let leaf_sums = (child_level == d).then(|| self.sums[first..first + width].to_vec());
        ChildEnergies {
            energies,
            leaf_sums,
        }
    }
}
