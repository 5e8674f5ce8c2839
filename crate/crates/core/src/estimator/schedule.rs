//! Level-dependent threshold schedules `λ_{k,n} = α_k / n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `α_k = 2/M`.
    Constant,
    /// `α_k = 2 log₂(d − k + 2)/M`.
    Logarithmic,
    /// `α_k = 2(d − k + 1)/M`.
    Linear,
    /// User-supplied `α_1, …, α_d`.
    Custom(Vec<f64>),
    /// No preset pruning above the leaves: expand the `q` heaviest branches
    /// per level, and keep leaves with `θ̂² ≥ 2/(Mn)`.
    AdaptiveTopQ(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSchedule {
    pub kind: ScheduleKind,
    /// Multiplier applied to every `α_k`.
    pub scale: f64,
}

impl ThresholdSchedule {
    pub fn new(kind: ScheduleKind) -> Self {
        ThresholdSchedule { kind, scale: 1.0 }
    }

    pub fn constant() -> Self {
        Self::new(ScheduleKind::Constant)
    }

    pub fn logarithmic() -> Self {
        Self::new(ScheduleKind::Logarithmic)
    }

    pub fn linear() -> Self {
        Self::new(ScheduleKind::Linear)
    }

    pub fn custom(alphas: Vec<f64>) -> Self {
        Self::new(ScheduleKind::Custom(alphas))
    }

    /// All thresholds zero: nothing is pruned.
    pub fn zero(dim: usize) -> Self {
        Self::custom(vec![0.0; dim])
    }

    pub fn adaptive(q: usize) -> Self {
        Self::new(ScheduleKind::AdaptiveTopQ(q))
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ScheduleKind::Constant => "constant",
            ScheduleKind::Logarithmic => "log",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Custom(_) => "custom",
            ScheduleKind::AdaptiveTopQ(_) => "adaptive",
        }
    }

    /// The branch budget of the adaptive schedule.
    pub fn top_q(&self) -> Option<usize> {
        match self.kind {
            ScheduleKind::AdaptiveTopQ(q) => Some(q),
            _ => None,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::invalid("schedule dimension must be positive"));
        }
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::invalid(format!(
                "threshold scale must be finite and nonnegative, got {}",
                self.scale
            )));
        }
        match &self.kind {
            ScheduleKind::Custom(alphas) => {
                if alphas.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: alphas.len(),
                    });
                }
                if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
                    return Err(Error::invalid(format!(
                        "alphas must be finite and nonnegative, got {a}"
                    )));
                }
            }
            ScheduleKind::AdaptiveTopQ(0) => {
                return Err(Error::invalid("top-q needs q >= 1"));
            }
            _ => {}
        }
        Ok(())
    }

    /// `α_k` for `1 ≤ k ≤ d`, before scaling.
    pub fn alpha(&self, k: usize, dim: usize) -> Result<f64> {
        if k == 0 || k > dim {
            return Err(Error::invalid(format!("level {k} outside 1..={dim}")));
        }
        let m = 2f64.powi(dim as i32);
        Ok(match &self.kind {
            ScheduleKind::Constant => 2.0 / m,
            ScheduleKind::Logarithmic => 2.0 * ((dim - k + 2) as f64).log2() / m,
            ScheduleKind::Linear => 2.0 * (dim - k + 1) as f64 / m,
            ScheduleKind::Custom(alphas) => *alphas.get(k - 1).ok_or(Error::DimensionMismatch {
                expected: dim,
                found: alphas.len(),
            })?,
            ScheduleKind::AdaptiveTopQ(_) => {
                if k == dim {
                    2.0 / m
                } else {
                    0.0
                }
            }
        })
    }

    /// `λ_{k,n} = scale · α_k / n`.
    pub fn lambda(&self, k: usize, dim: usize, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(self.scale * self.alpha(k, dim)? / n as f64)
    }

    /// `[λ_1, …, λ_d]` prefixed by an unused slot for the root, so level `k` is index `k`.
    pub fn lambdas(&self, dim: usize, n: usize) -> Result<Vec<f64>> {
        self.validate(dim)?;
        let mut out = Vec::with_capacity(dim + 1);
        out.push(0.0);
        for k in 1..=dim {
            out.push(self.lambda(k, dim, n)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_non_increasing_and_meet_at_the_leaves() {
        for d in [1, 2, 7, 15, 50] {
            let m = 2f64.powi(d as i32);
            for s in [
                ThresholdSchedule::constant(),
                ThresholdSchedule::logarithmic(),
                ThresholdSchedule::linear(),
            ] {
                let a: Vec<f64> = (1..=d).map(|k| s.alpha(k, d).unwrap()).collect();
                assert!(a.windows(2).all(|w| w[0] >= w[1]), "{}", s.name());
                assert!((a[d - 1] - 2.0 / m).abs() <= 1e-15 * a[d - 1]);
                assert!(a.iter().all(|x| *x > 0.0));
            }
        }
    }

    #[test]
    fn preset_values() {
        let d = 15;
        let m = 32768.0;
        assert_eq!(ThresholdSchedule::linear().alpha(1, d).unwrap(), 30.0 / m);
        assert_eq!(
            ThresholdSchedule::logarithmic().alpha(1, d).unwrap(),
            2.0 * 16f64.log2() / m
        );
        let lam = ThresholdSchedule::constant().lambda(4, d, 1000).unwrap();
        assert_eq!(lam, 2.0 / m / 1000.0);
        let scaled = ThresholdSchedule::constant().with_scale(3.0);
        assert_eq!(scaled.lambda(4, d, 1000).unwrap(), 3.0 * lam);
    }

    #[test]
    fn adaptive_only_thresholds_leaves() {
        let s = ThresholdSchedule::adaptive(16);
        assert_eq!(s.top_q(), Some(16));
        assert_eq!(s.alpha(3, 10).unwrap(), 0.0);
        assert_eq!(s.alpha(10, 10).unwrap(), 2.0 / 1024.0);
    }

    #[test]
    fn validation() {
        assert!(ThresholdSchedule::custom(vec![1.0, 0.5])
            .validate(3)
            .is_err());
        assert!(ThresholdSchedule::custom(vec![1.0, -0.5])
            .validate(2)
            .is_err());
        assert!(ThresholdSchedule::custom(vec![1.0, f64::NAN])
            .validate(2)
            .is_err());
        assert!(ThresholdSchedule::adaptive(0).validate(4).is_err());
        assert!(ThresholdSchedule::constant()
            .with_scale(-1.0)
            .validate(4)
            .is_err());
        assert!(ThresholdSchedule::zero(4).validate(4).is_ok());
        assert!(ThresholdSchedule::constant().alpha(0, 4).is_err());
        assert!(ThresholdSchedule::constant().alpha(5, 4).is_err());
        assert_eq!(
            ThresholdSchedule::zero(3).lambdas(3, 10).unwrap(),
            vec![0.0; 4]
        );
    }
}
