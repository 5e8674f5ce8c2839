//! Reference estimators: termwise thresholding, the oracle-threshold
//! estimator, the histogram, the full series and the best threshold in hindsight.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::estimator::{coefficient_from_sum, empirical_sign_sums};
use crate::eval::{mse_exact, RiskReport};
use crate::fwht::{fwht, DenseVector};
use crate::model::{Dataset, GroundTruth, SparseDensity};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    OttKronmal,
    Ideal,
    Histogram,
    Unthresholded,
    ExhaustiveSearch,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::OttKronmal => "ott_kronmal",
            BaselineKind::Ideal => "ideal",
            BaselineKind::Histogram => "histogram",
            BaselineKind::Unthresholded => "unthresholded",
            BaselineKind::ExhaustiveSearch => "exhaustive_search",
        }
    }
}

/// Every nonzero empirical coefficient whose index and integer sign sum
/// `c_s = n 2^{d/2} θ̂_s` pass `keep`.
fn select(data: &Dataset, mut keep: impl FnMut(u64, i64) -> bool) -> Result<SparseDensity> {
    let (d, n) = (data.dim(), data.n());
    let coeffs: BTreeMap<u64, f64> = empirical_sign_sums(data)?
        .into_iter()
        .enumerate()
        .filter(|&(s, c)| c != 0 && keep(s as u64, c))
        .map(|(s, c)| (s as u64, coefficient_from_sum(c, d, n)))
        .collect();
    SparseDensity::from_pairs(
        d,
        coeffs
            .into_iter()
            .map(|(s, v)| (BitVector::new(s, d).expect("index within d bits"), v)),
    )
}

/// Keeps `θ̂_s` when `θ̂²_s > 2/(M(n+1))`.
///
/// Decided exactly as `c_s² (n+1) > 2n²`; at `n = 1` every coefficient sits on
/// the boundary and is rejected.
pub fn ott_kronmal(data: &Dataset) -> Result<SparseDensity> {
    let n = data.n() as i128;
    select(data, |_, c| (c as i128).pow(2) * (n + 1) > 2 * n * n)
}

/// Keeps `θ̂_s` when the true `θ²_s > 1/(M(n+1))`.
pub fn ideal_estimator(data: &Dataset, truth: &dyn GroundTruth) -> Result<SparseDensity> {
    let d = data.dim();
    check_dim(d, truth.dim())?;
    let m = 2f64.powi(d as i32);
    let lambda = 1.0 / (m * (data.n() as f64 + 1.0));
    select(data, |s, _| {
        let theta = truth.coefficient(&BitVector::new(s, d).expect("index within d bits"));
        theta * theta > lambda
    })
}

/// All nonzero empirical coefficients.
pub fn unthresholded_estimator(data: &Dataset) -> Result<SparseDensity> {
    select(data, |_, _| true)
}

/// Empirical frequencies, stored only at observed points.
#[derive(Clone, Debug)]
pub struct Histogram {
    dim: usize,
    n: usize,
    counts: HashMap<u64, u64>,
}

impl Histogram {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(1/n) Σ_i I{X_i = x}`.
    pub fn eval(&self, x: &BitVector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.counts.get(&x.bits()).copied().unwrap_or(0) as f64 / self.n as f64)
    }

    /// Number of distinct observed points.
    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// Sum of all frequencies: exactly 1, since the counts sum to `n`.
    pub fn total_mass(&self) -> f64 {
        self.counts.values().sum::<u64>() as f64 / self.n as f64
    }

    pub fn to_dense(&self) -> Result<DenseVector> {
        let mut table = DenseVector::zeros(self.dim)?;
        let n = self.n as f64;
        for (&x, &c) in &self.counts {
            table.values_mut()[x as usize] = c as f64 / n;
        }
        Ok(table)
    }

    /// Its Walsh coefficients, which are the empirical coefficients.
    pub fn coefficients(&self) -> Result<DenseVector> {
        fwht(&self.to_dense()?)
    }
}

pub fn histogram_estimator(data: &Dataset) -> Histogram {
    Histogram {
        dim: data.dim(),
        n: data.n(),
        counts: data.counts(),
    }
}

/// Result of the search over hard thresholds.
#[derive(Clone, Debug)]
pub struct ThresholdSearch {
    /// Smallest threshold attaining the minimum risk; `f64::INFINITY` keeps nothing.
    pub lambda: f64,
    pub estimate: SparseDensity,
    pub risk: RiskReport,
}

/// The termwise rule `θ̂²_s ≥ λ` with the `λ` minimizing the true Parseval risk.
///
/// Only the distinct values of `θ̂²_s`, together with 0 and `+∞`, can change
/// the decision, so those are the candidates. Thresholds are swept from `+∞`
/// downwards, adding one tie group of coefficients at a time; on equal risk
/// the smaller threshold wins.
pub fn exhaustive_threshold_search(
    data: &Dataset,
    truth: &dyn GroundTruth,
) -> Result<ThresholdSearch> {
    let (d, n) = (data.dim(), data.n());
    check_dim(d, truth.dim())?;
    let sums = empirical_sign_sums(data)?;
    let mut order: Vec<(u64, i64)> = sums
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(s, &c)| (s as u64, c))
        .collect();
    // by |c| descending, which is θ̂² descending, with exact ties
    order.sort_by(|a, b| {
        b.1.unsigned_abs()
            .cmp(&a.1.unsigned_abs())
            .then(a.0.cmp(&b.0))
    });

    let theta_of = |s: u64| truth.coefficient(&BitVector::new(s, d).expect("index within d bits"));
    let mut risk = truth.total_energy();
    let mut best_risk = risk;
    let mut best_lambda = f64::INFINITY;
    let mut best_len = 0;
    let mut i = 0;
    while i < order.len() {
        let magnitude = order[i].1.unsigned_abs();
        while i < order.len() && order[i].1.unsigned_abs() == magnitude {
            let (s, c) = order[i];
            let theta = theta_of(s);
            let hat = coefficient_from_sum(c, d, n);
            risk += (hat - theta) * (hat - theta) - theta * theta;
            i += 1;
        }
        if risk <= best_risk {
            best_risk = risk;
            best_lambda = coefficient_from_sum(magnitude as i64, d, n).powi(2);
            best_len = i;
        }
    }
    if best_len == order.len() {
        // λ = 0 makes the same decisions as the smallest nonzero value
        best_lambda = 0.0;
    }

    let estimate = SparseDensity::from_pairs(
        d,
        order[..best_len].iter().map(|&(s, c)| {
            (
                BitVector::new(s, d).expect("index within d bits"),
                coefficient_from_sum(c, d, n),
            )
        }),
    )?;
    let risk = mse_exact(&estimate, truth)?;
    Ok(ThresholdSearch {
        lambda: best_lambda,
        estimate,
        risk,
    })
}

/// Runs a baseline that needs no tuning beyond its kind.
pub fn run_baseline(
    kind: &BaselineKind,
    data: &Dataset,
    truth: Option<&dyn GroundTruth>,
) -> Result<SparseDensity> {
    let need_truth =
        || truth.ok_or_else(|| Error::invalid(format!("{} needs ground truth", kind.name())));
    match kind {
        BaselineKind::OttKronmal => ott_kronmal(data),
        BaselineKind::Ideal => ideal_estimator(data, need_truth()?),
        BaselineKind::Histogram | BaselineKind::Unthresholded => unthresholded_estimator(data),
        BaselineKind::ExhaustiveSearch => {
            Ok(exhaustive_threshold_search(data, need_truth()?)?.estimate)
        }
    }
}
