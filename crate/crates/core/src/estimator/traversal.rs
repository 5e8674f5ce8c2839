//! Recursive Walsh thresholding: walk the prefix tree of coefficient indices,
//! expanding a node only while its estimated subtree weight clears the level
//! threshold.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::bits::low_mask;
use crate::error::{Error, Result};
use crate::estimator::config::{QueuePolicy, TraversalConfig, TraversalStats};
use crate::estimator::kernel::{
    coefficient_from_sum, energy_to_weight, ChildEnergies, DirectBlock, SuffixIndex,
};
use crate::estimator::schedule::ThresholdSchedule;
use crate::model::{Dataset, SparseDensity};

/// An open prefix `u` of length `level`, with its exact integer energy.
#[derive(Clone)]
struct Node {
    bits: u64,
    level: usize,
    energy: u64,
    /// Set once the subtree's coefficients have been computed directly.
    block: Option<Arc<DirectBlock>>,
}

#[derive(Default)]
struct Expansion {
    internal: Vec<Node>,
    leaves: Vec<(u64, i64)>,
    stats: TraversalStats,
}

struct Walker<'a> {
    dim: usize,
    n: usize,
    step: usize,
    index: SuffixIndex,
    lambdas: Vec<f64>,
    config: &'a TraversalConfig,
    /// Suffix cells allocated for direct blocks so far.
    block_cells: AtomicU64,
}

/// Bound on direct-block cells built in one traversal, 2 GiB of sums.
const BLOCK_CELL_LIMIT: u64 = 1 << 27;

impl Walker<'_> {
    fn weight(&self, energy: u64, level: usize) -> f64 {
        energy_to_weight(energy, level, self.n)
    }

    fn children(
        &self,
        node: &Node,
        t: usize,
        stats: &mut TraversalStats,
    ) -> (ChildEnergies, Option<Arc<DirectBlock>>) {
        let (d, k, n) = (self.dim, node.level, self.n);
        match &node.block {
            Some(block) => {
                let local = node.bits & low_mask(k - block.level());
                (block.child_energies(local, k, t), Some(Arc::clone(block)))
            }
            None if self.config.direct_switch.applies(k, d, n)
                && DirectBlock::feasible(d, k, n) =>
            {
                stats.direct_blocks += 1;
                self.block_cells
                    .fetch_add(1 << (d - k), AtomicOrdering::Relaxed);
                let block = Arc::new(self.index.block(node.bits, k));
                (block.child_energies(0, k, t), Some(block))
            }
            None => (self.index.child_energies(node.bits, k, t), None),
        }
    }

    /// Evaluates the `2^t` descendants of `node` one grid step down. A child
    /// survives only if every intermediate prefix also clears its threshold,
    /// which is checked through partial sums of the child energies.
    fn expand(&self, node: &Node) -> Expansion {
        let d = self.dim;
        let k = node.level;
        let t = self.step.min(d - k);
        let mut out = Expansion::default();
        let (children, block) = self.children(node, t, &mut out.stats);

        // energies[j] holds the 2^j prefixes at level k + j
        let mut energies: Vec<Vec<u64>> = vec![Vec::new(); t + 1];
        energies[t] = children.energies;
        for j in (1..t).rev() {
            energies[j] = energies[j + 1]
                .chunks_exact(2)
                .map(|pair| (pair[0] + pair[1]) >> 1)
                .collect();
        }
        let mut alive = vec![true];
        for (j, level_energies) in energies.iter().enumerate().skip(1) {
            let lambda = self.lambdas[k + j];
            alive = level_energies
                .iter()
                .enumerate()
                .map(|(e, &s)| {
                    alive[e >> 1] && self.config.comparison.passes(self.weight(s, k + j), lambda)
                })
                .collect();
        }

        let base_order = node.bits.count_ones() as usize;
        let child_level = k + t;
        for (e, &energy) in energies[t].iter().enumerate() {
            if let Some(m) = self.config.max_order {
                if base_order + e.count_ones() as usize > m {
                    out.stats.pruned_by_order += 1;
                    continue;
                }
            }
            out.stats.weight_evaluations += 1;
            if !alive[e] {
                out.stats.pruned_by_threshold += 1;
                continue;
            }
            let bits = (node.bits << t) | e as u64;
            if child_level == d {
                out.stats.recursive_calls += 1;
                let sums = children
                    .leaf_sums
                    .as_ref()
                    .expect("leaf level carries coefficient sums");
                out.leaves.push((bits, sums[e]));
            } else {
                out.internal.push(Node {
                    bits,
                    level: child_level,
                    energy,
                    block: block.clone(),
                });
            }
        }
        out
    }

    fn record(&self, leaves: &[(u64, i64)], coeffs: &mut BTreeMap<u64, f64>) {
        for &(s, c) in leaves {
            if c != 0 {
                coeffs.insert(s, coefficient_from_sum(c, self.dim, self.n));
            }
        }
    }

    fn root(&self) -> Node {
        Node {
            bits: 0,
            level: 0,
            energy: self.index.energy(0, 0),
            block: None,
        }
    }

    fn check_budget(&self, stats: &TraversalStats) -> Result<()> {
        match self.config.call_limit {
            Some(limit) if stats.recursive_calls > limit => Err(Error::capacity(format!(
                "traversal exceeded {limit} recursive calls; raise the thresholds or set top-q or a Hamming cap"
            ))),
            _ if self.block_cells.load(AtomicOrdering::Relaxed) > BLOCK_CELL_LIMIT => Err(Error::capacity(
                "direct coefficient blocks exceed the memory bound; raise the thresholds or set top-q or a Hamming cap",
            )),
            _ => Ok(()),
        }
    }

    fn run_queue(&self, stats: &mut TraversalStats, coeffs: &mut BTreeMap<u64, f64>) -> Result<()> {
        let mut open = Frontier::new(self.config.queue_policy);
        open.push(self.root(), self.n);
        while let Some(node) = open.pop() {
            let exp = self.expand(&node);
            stats.absorb(&exp.stats);
            stats.recursive_calls += exp.internal.len() as u64;
            self.record(&exp.leaves, coeffs);
            open.extend(exp.internal, self.n);
            self.check_budget(stats)?;
        }
        Ok(())
    }

    /// Level-synchronous traversal keeping only the `q` heaviest open prefixes per level.
    fn run_beam(
        &self,
        q: usize,
        stats: &mut TraversalStats,
        coeffs: &mut BTreeMap<u64, f64>,
    ) -> Result<()> {
        let mut frontier = vec![self.root()];
        while !frontier.is_empty() {
            let expansions: Vec<Expansion> =
                frontier.par_iter().map(|node| self.expand(node)).collect();
            let mut candidates = Vec::new();
            for exp in expansions {
                stats.absorb(&exp.stats);
                self.record(&exp.leaves, coeffs);
                candidates.extend(exp.internal);
            }
            if candidates.len() > q {
                // all candidates share one level, so energies compare like weights
                candidates
                    .sort_unstable_by(|a, b| b.energy.cmp(&a.energy).then(a.bits.cmp(&b.bits)));
                stats.pruned_by_top_q += (candidates.len() - q) as u64;
                candidates.truncate(q);
            }
            stats.recursive_calls += candidates.len() as u64;
            self.check_budget(stats)?;
            frontier = candidates;
        }
        Ok(())
    }
}

/// Open-node container for the chosen expansion order.
enum Frontier {
    Stack(Vec<Node>),
    Fifo(VecDeque<Node>),
    Heap(BinaryHeap<Ranked>),
}

struct Ranked {
    weight: f64,
    node: Node,
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.node.level.cmp(&other.node.level))
            .then(other.node.bits.cmp(&self.node.bits))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl Frontier {
    fn new(policy: QueuePolicy) -> Self {
        match policy {
            QueuePolicy::DepthFirst => Frontier::Stack(Vec::new()),
            QueuePolicy::BreadthFirst => Frontier::Fifo(VecDeque::new()),
            QueuePolicy::MaxWeight => Frontier::Heap(BinaryHeap::new()),
        }
    }

    fn push(&mut self, node: Node, n: usize) {
        match self {
            Frontier::Stack(s) => s.push(node),
            Frontier::Fifo(q) => q.push_back(node),
            Frontier::Heap(h) => h.push(Ranked {
                weight: energy_to_weight(node.energy, node.level, n),
                node,
            }),
        }
    }

    /// Siblings arrive in lexicographic order; the stack takes them reversed
    /// so that the smallest index is expanded first.
    fn extend(&mut self, nodes: Vec<Node>, n: usize) {
        if let Frontier::Stack(s) = self {
            s.extend(nodes.into_iter().rev());
        } else {
            for node in nodes {
                self.push(node, n);
            }
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Stack(s) => s.pop(),
            Frontier::Fifo(q) => q.pop_front(),
            Frontier::Heap(h) => h.pop().map(|r| r.node),
        }
    }
}

/// Runs the thresholded tree traversal and returns the retained empirical
/// coefficients.
///
/// Without top-q, the output is exactly the accepting set
/// `{s : Ŵ_{π_k s} ≥ λ_{k,n} for all 1 ≤ k ≤ d}` (restricted to Hamming weight
/// `≤ m` when a cap is set), independent of branching, queue order and the
/// direct switch. Coefficients that are exactly zero are not stored. With
/// top-q (from the config, or else the adaptive schedule) the traversal is
/// level-synchronous and keeps the `q` heaviest surviving prefixes at each
/// grid level, ties going to the smaller index; leaves are thresholded only.
pub fn rwt_estimate(
    data: &Dataset,
    schedule: &ThresholdSchedule,
    config: &TraversalConfig,
) -> Result<(SparseDensity, TraversalStats)> {
    let start = Instant::now();
    let d = data.dim();
    let n = data.n();
    config.validate(d)?;
    let mut lambdas = schedule.lambdas(d, n)?;
    if let Some(leaf) = config.leaf_threshold_override {
        lambdas[d] = leaf;
    }
    let walker = Walker {
        dim: d,
        n,
        step: config.branch_bits(),
        index: SuffixIndex::new(data),
        lambdas,
        config,
        block_cells: AtomicU64::new(0),
    };

    let mut stats = TraversalStats {
        recursive_calls: 1,
        ..TraversalStats::default()
    };
    let mut coeffs = BTreeMap::new();
    match config.top_q.or_else(|| schedule.top_q()) {
        Some(q) => walker.run_beam(q, &mut stats, &mut coeffs)?,
        None => walker.run_queue(&mut stats, &mut coeffs)?,
    }
    stats.retained_coefficients = coeffs.len() as u64;
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((SparseDensity::from_raw_map(d, coeffs), stats))
}
