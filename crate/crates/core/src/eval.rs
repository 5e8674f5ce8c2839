//! Squared L² risk of an estimate against a known density.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{low_mask, BitVector};
use crate::error::{check_dim, Error, Result};
use crate::fwht::DenseVector;
use crate::model::{GroundTruth, SparseDensity, TruthSource};
use crate::rng::{self, tags};

/// Default number of uniform probe points for sampled risk.
pub const DEFAULT_PROBES: usize = 100_000;

const PROBE_CHUNK: usize = 4096;

/// `‖f − f̂‖²` split into the error on retained coefficients and the energy
/// of the rejected ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub mse: f64,
    /// `Σ_{retained} (θ̂_s − θ_s)²`; unknown for sampled risk.
    pub variance_term: Option<f64>,
    /// `Σ_{rejected} θ_s²`; unknown for sampled risk.
    pub bias_term: Option<f64>,
    pub retained_count: usize,
    pub truth_source: TruthSource,
}

/// Parseval risk: exact coefficient errors on the retained set plus the
/// truth's total energy minus its energy on the retained set.
pub fn mse_exact(estimate: &SparseDensity, truth: &dyn GroundTruth) -> Result<RiskReport> {
    let d = truth.dim();
    check_dim(d, estimate.dim())?;
    let mut variance = 0.0;
    let mut kept_energy = 0.0;
    for (s, value) in estimate.iter() {
        let theta = truth.coefficient(&s);
        variance += (value - theta) * (value - theta);
        kept_energy += theta * theta;
    }
    let bias = (truth.total_energy() - kept_energy).max(0.0);
    Ok(RiskReport {
        mse: variance + bias,
        variance_term: Some(variance),
        bias_term: Some(bias),
        retained_count: estimate.len(),
        truth_source: truth.source(),
    })
}

/// `2^d` times the mean of `(f̂(x) − f(x))²` over uniform probe points, an
/// unbiased estimate of the squared L² distance.
///
/// Probes are drawn in fixed-size chunks from per-chunk substreams, so the
/// value depends only on the seed, not on the thread count.
pub fn mse_sampled(
    estimate: &SparseDensity,
    truth: &dyn GroundTruth,
    probe_count: usize,
    seed: u64,
) -> Result<f64> {
    let d = truth.dim();
    check_dim(d, estimate.dim())?;
    if probe_count == 0 {
        return Err(Error::invalid("probe count must be positive"));
    }
    let mask = low_mask(d);
    let chunks = probe_count.div_ceil(PROBE_CHUNK);
    let total: f64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rng::stream(seed, tags::PROBE, chunk as u64);
            let len = PROBE_CHUNK.min(probe_count - chunk * PROBE_CHUNK);
            (0..len)
                .map(|_| {
                    let x = BitVector::new(rng.gen::<u64>() & mask, d).expect("masked to d bits");
                    let diff = estimate.eval_index(x.bits()) - truth.density(&x);
                    diff * diff
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total / probe_count as f64 * 2f64.powi(d as i32))
}

/// Risk from uniform probes, with the decomposition left unknown.
pub fn sampled_report(
    estimate: &SparseDensity,
    truth: &dyn GroundTruth,
    probe_count: usize,
    seed: u64,
) -> Result<RiskReport> {
    Ok(RiskReport {
        mse: mse_sampled(estimate, truth, probe_count, seed)?,
        variance_term: None,
        bias_term: None,
        retained_count: estimate.len(),
        truth_source: TruthSource::SampleBased,
    })
}

/// `Σ_x f(x)² = Σ_s θ_s²`, in closed form where the truth provides one.
pub fn total_energy(truth: &dyn GroundTruth) -> f64 {
    truth.total_energy()
}

/// `Σ_x f(x)²` of a tabulated function.
pub fn table_energy(table: &DenseVector) -> f64 {
    table.sum_of_squares()
}

pub const CSV_HEADER: &str =
    "estimator,d,n,seed,schedule,mse,variance_term,bias_term,retained,calls,time_ms";

/// One long-format result row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub estimator: String,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub schedule: String,
    pub mse: Option<f64>,
    pub variance_term: Option<f64>,
    pub bias_term: Option<f64>,
    pub retained: Option<usize>,
    pub calls: Option<u64>,
    pub time_ms: Option<f64>,
}

impl ResultRow {
    /// A row with only the key columns filled; used as is for skipped combinations.
    pub fn new(estimator: &str, schedule: &str, d: usize, n: usize, seed: u64) -> Self {
        ResultRow {
            estimator: estimator.to_string(),
            d,
            n,
            seed,
            schedule: schedule.to_string(),
            mse: None,
            variance_term: None,
            bias_term: None,
            retained: None,
            calls: None,
            time_ms: None,
        }
    }

    pub fn with_report(mut self, report: &RiskReport, calls: Option<u64>, time_ms: f64) -> Self {
        self.mse = Some(report.mse);
        self.variance_term = report.variance_term;
        self.bias_term = report.bias_term;
        self.retained = Some(report.retained_count);
        self.calls = calls;
        self.time_ms = Some(time_ms);
        self
    }

    /// The row in `CSV_HEADER` column order, without a line terminator.
    /// Missing values are empty fields.
    pub fn to_csv(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|v| v.to_string()).unwrap_or_default()
        }
        let mut line = String::new();
        write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.estimator,
            self.d,
            self.n,
            self.seed,
            self.schedule,
            opt(&self.mse),
            opt(&self.variance_term),
            opt(&self.bias_term),
            opt(&self.retained),
            opt(&self.calls),
            opt(&self.time_ms.map(|t| (t * 1000.0).round() / 1000.0)),
        )
        .expect("writing to a String cannot fail");
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{rwt_estimate, ThresholdSchedule, TraversalConfig};
    use crate::fwht::fwht;
    use crate::model::{BernoulliMixture, DenseDensity, MixtureSpec};

    fn mixture(d: usize, seed: u64) -> BernoulliMixture {
        BernoulliMixture::synthetic(&MixtureSpec::standard(d, seed)).unwrap()
    }

    #[test]
    fn exact_truth_has_zero_risk() {
        let mix = mixture(8, 1);
        let theta = fwht(&mix.dense_table().unwrap()).unwrap();
        let est = SparseDensity::from_dense_coefficients(&theta);
        let report = mse_exact(&est, &mix).unwrap();
        assert!(report.mse < 1e-15);
        assert!(mse_sampled(&est, &mix, 1000, 3).unwrap() < 1e-15);
    }

    #[test]
    fn empty_estimate_risk_is_total_energy() {
        let mix = mixture(9, 2);
        let table = mix.dense_table().unwrap();
        let report = mse_exact(&SparseDensity::new(9).unwrap(), &mix).unwrap();
        assert!((report.mse - table_energy(&table)).abs() < 1e-15);
        assert_eq!(report.variance_term, Some(0.0));
        assert_eq!(report.truth_source, TruthSource::AnalyticMixture);
    }

    #[test]
    fn total_energy_endpoints() {
        let uniform =
            DenseDensity::from_table(DenseVector::new(5, vec![1.0 / 32.0; 32]).unwrap()).unwrap();
        assert!((total_energy(&uniform) - 1.0 / 32.0).abs() < 1e-15);
        let mut point = vec![0.0; 32];
        point[7] = 1.0;
        let point = DenseDensity::from_table(DenseVector::new(5, point).unwrap()).unwrap();
        assert!((total_energy(&point) - 1.0).abs() < 1e-15);
        let mix = mixture(12, 4);
        assert!((total_energy(&mix) - table_energy(&mix.dense_table().unwrap())).abs() < 1e-12);
    }

    #[test]
    fn parseval_matches_pointwise_error() {
        let mix = mixture(10, 5);
        let data = mix.sample(2000, 6).unwrap();
        let (est, _) = rwt_estimate(
            &data,
            &ThresholdSchedule::constant(),
            &TraversalConfig::default(),
        )
        .unwrap();
        let report = mse_exact(&est, &mix).unwrap();
        let f = mix.dense_table().unwrap();
        let fhat = est.to_dense_table().unwrap();
        let direct: f64 = f
            .values()
            .iter()
            .zip(fhat.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        assert!((report.mse - direct).abs() <= 1e-10 * direct.max(1e-300) + 1e-18);
        let v = report.variance_term.unwrap();
        let b = report.bias_term.unwrap();
        assert!((report.mse - (v + b)).abs() <= 1e-12);
    }

    #[test]
    fn sampled_risk_is_deterministic_and_converges() {
        let mix = mixture(12, 7);
        let data = mix.sample(3000, 8).unwrap();
        let (est, _) = rwt_estimate(
            &data,
            &ThresholdSchedule::constant(),
            &TraversalConfig::default(),
        )
        .unwrap();
        let exact = mse_exact(&est, &mix).unwrap().mse;
        let a = mse_sampled(&est, &mix, 5000, 1).unwrap();
        assert_eq!(a, mse_sampled(&est, &mix, 5000, 1).unwrap());
        let big = mse_sampled(&est, &mix, 400_000, 2).unwrap();
        assert!((big - exact).abs() < 0.05 * exact, "{big} vs {exact}");
        assert!(mse_sampled(&est, &mix, 0, 1).is_err());
    }

    #[test]
    fn csv_row() {
        let row = ResultRow::new("ott_kronmal", "-", 50, 1000, 3);
        assert_eq!(row.to_csv(), "ott_kronmal,50,1000,3,-,,,,,,");
        assert_eq!(
            row.to_csv().split(',').count(),
            CSV_HEADER.split(',').count()
        );
    }
}
