//! Traversal options and run statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::kernel::MAX_BRANCH_BITS;

/// Order in which open nodes are expanded. Does not affect the output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueuePolicy {
    DepthFirst,
    BreadthFirst,
    /// Heaviest `Ŵ_u` first; ties go to the deeper node, then the smaller index.
    #[default]
    MaxWeight,
}

/// When to stop walking the tree and compute a whole subtree of coefficients at once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectSwitch {
    Never,
    /// At depth `k ≥ d − log₂(n d)`, where the direct estimator becomes cheaper.
    #[default]
    Auto,
    /// At depth `k ≥ j`.
    FromDepth(usize),
}

impl DirectSwitch {
    pub fn applies(self, k: usize, d: usize, n: usize) -> bool {
        match self {
            DirectSwitch::Never => false,
            DirectSwitch::Auto => k as f64 >= d as f64 - ((n * d) as f64).log2(),
            DirectSwitch::FromDepth(j) => k >= j,
        }
    }
}

/// How a weight is compared against its threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Keep when `Ŵ ≥ λ`.
    #[default]
    Inclusive,
    /// Keep when `Ŵ > λ`.
    Strict,
}

impl Comparison {
    #[inline]
    pub fn passes(self, weight: f64, threshold: f64) -> bool {
        match self {
            Comparison::Inclusive => weight >= threshold,
            Comparison::Strict => weight > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraversalConfig {
    /// Children per expansion, `N = 2^b`.
    pub branching: usize,
    /// Hamming-weight cap `m` on coefficient indices.
    pub max_order: Option<usize>,
    /// Expand only the `q` heaviest branches per level.
    pub top_q: Option<usize>,
    pub direct_switch: DirectSwitch,
    pub queue_policy: QueuePolicy,
    /// Replaces `λ_{d,n}`.
    pub leaf_threshold_override: Option<f64>,
    pub comparison: Comparison,
    /// Abort with a capacity error once this many recursive calls are made.
    pub call_limit: Option<u64>,
}

/// Default bound on recursive calls, about a gigabyte of open nodes and
/// retained coefficients.
pub const DEFAULT_CALL_LIMIT: u64 = 1 << 24;

impl Default for TraversalConfig {
    fn default() -> Self {
        TraversalConfig {
            branching: 2,
            max_order: None,
            top_q: None,
            direct_switch: DirectSwitch::Auto,
            queue_policy: QueuePolicy::MaxWeight,
            leaf_threshold_override: None,
            comparison: Comparison::Inclusive,
            call_limit: Some(DEFAULT_CALL_LIMIT),
        }
    }
}

impl TraversalConfig {
    pub fn with_branching(mut self, branching: usize) -> Self {
        self.branching = branching;
        self
    }

    pub fn with_max_order(mut self, m: usize) -> Self {
        self.max_order = Some(m);
        self
    }

    pub fn with_top_q(mut self, q: usize) -> Self {
        self.top_q = Some(q);
        self
    }

    pub fn with_direct_switch(mut self, switch: DirectSwitch) -> Self {
        self.direct_switch = switch;
        self
    }

    pub fn with_queue_policy(mut self, policy: QueuePolicy) -> Self {
        self.queue_policy = policy;
        self
    }

    pub fn with_leaf_threshold(mut self, lambda: f64) -> Self {
        self.leaf_threshold_override = Some(lambda);
        self
    }

    pub fn with_comparison(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    /// `None` removes the bound.
    pub fn with_call_limit(mut self, limit: Option<u64>) -> Self {
        self.call_limit = limit;
        self
    }

    /// `b = log₂ N`.
    pub fn branch_bits(&self) -> usize {
        self.branching.trailing_zeros() as usize
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.branching < 2 || !self.branching.is_power_of_two() {
            return Err(Error::invalid(format!(
                "branching must be a power of two >= 2, got {}",
                self.branching
            )));
        }
        if self.branch_bits() > MAX_BRANCH_BITS {
            return Err(Error::capacity(format!(
                "branching {} exceeds 2^{MAX_BRANCH_BITS}",
                self.branching
            )));
        }
        if let Some(m) = self.max_order {
            if m > dim {
                return Err(Error::invalid(format!(
                    "max order {m} exceeds dimension {dim}"
                )));
            }
        }
        if self.top_q == Some(0) {
            return Err(Error::invalid("top-q needs q >= 1"));
        }
        if let Some(l) = self.leaf_threshold_override {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::invalid(format!(
                    "leaf threshold must be finite and nonnegative, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// Work counters for one traversal.
///
/// Every weight computed for a Hamming-admissible child ends up in exactly one
/// of three places: a recursive call, `pruned_by_threshold`, or
/// `pruned_by_top_q`. So `weight_evaluations + 1 == recursive_calls +
/// pruned_by_threshold + pruned_by_top_q`, the `+ 1` being the root call.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraversalStats {
    /// Calls of the recursive routine: the root plus every child that
    /// passed its thresholds, leaves included.
    pub recursive_calls: u64,
    /// Child weights computed, one per Hamming-admissible child.
    pub weight_evaluations: u64,
    pub retained_coefficients: u64,
    pub pruned_by_threshold: u64,
    /// Children discarded for exceeding the Hamming-weight cap.
    pub pruned_by_order: u64,
    pub pruned_by_top_q: u64,
    /// Subtrees whose coefficients were all computed directly.
    pub direct_blocks: u64,
    pub wall_time_ms: f64,
}

impl TraversalStats {
    pub(crate) fn absorb(&mut self, other: &TraversalStats) {
        self.recursive_calls += other.recursive_calls;
        self.weight_evaluations += other.weight_evaluations;
        self.pruned_by_threshold += other.pruned_by_threshold;
        self.pruned_by_order += other.pruned_by_order;
        self.pruned_by_top_q += other.pruned_by_top_q;
        self.direct_blocks += other.direct_blocks;
    }

    /// Equality of everything except the wall time.
    pub fn same_counts(&self, other: &TraversalStats) -> bool {
        TraversalStats {
            wall_time_ms: 0.0,
            ..self.clone()
        } == TraversalStats {
            wall_time_ms: 0.0,
            ..other.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let c = TraversalConfig::default();
        assert!(c.validate(8).is_ok());
        assert_eq!(c.branch_bits(), 1);
        assert!(c.clone().with_branching(3).validate(8).is_err());
        assert!(c.clone().with_branching(1).validate(8).is_err());
        assert!(matches!(
            c.clone().with_branching(1 << 17).validate(30),
            Err(Error::Capacity(_))
        ));
        assert!(c.clone().with_max_order(9).validate(8).is_err());
        assert!(c.clone().with_max_order(8).validate(8).is_ok());
        assert!(c.clone().with_top_q(0).validate(8).is_err());
        assert!(c.clone().with_leaf_threshold(-1.0).validate(8).is_err());
        assert_eq!(c.with_branching(256).branch_bits(), 8);
    }

    #[test]
    fn switch_predicate() {
        // d − log₂(nd) = 15 − log₂(15000) ≈ 1.13
        assert!(!DirectSwitch::Auto.applies(1, 15, 1000));
        assert!(DirectSwitch::Auto.applies(2, 15, 1000));
        assert!(!DirectSwitch::Never.applies(15, 15, 1000));
        assert!(DirectSwitch::FromDepth(4).applies(4, 15, 1));
    }

    #[test]
    fn comparison() {
        assert!(Comparison::Inclusive.passes(1.0, 1.0));
        assert!(!Comparison::Strict.passes(1.0, 1.0));
        assert!(Comparison::Strict.passes(1.5, 1.0));
    }
}
