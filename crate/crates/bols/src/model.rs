//! Domain types for two-arm batched experiments and the per-batch
//! sufficient statistics every estimator consumes.

use crate::estimators::VarianceMode;
use thiserror::Error;

/// One of the two experiment arms. Arm 1 is treatment, arm 0 control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArmId {
    Control,
    Treatment,
}

impl ArmId {
    pub fn index(self) -> u8 {
        match self {
            ArmId::Control => 0,
            ArmId::Treatment => 1,
        }
    }

    pub fn from_index(idx: u8) -> Option<ArmId> {
        match idx {
            0 => Some(ArmId::Control),
            1 => Some(ArmId::Treatment),
            _ => None,
        }
    }
}

/// A single observed unit: which batch it arrived in, which arm it was
/// assigned, and its outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRecord {
    pub batch: u32,
    pub arm: ArmId,
    pub value: f64,
}

/// Per-batch sufficient statistics. Means/variances of an arm that
/// received no units (or too few for a variance estimate) are absent;
/// sentinel numbers are never used.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    /// 1-based period index.
    pub t: u32,
    pub n_treated: u64,
    pub n_control: u64,
    pub mean_treated: Option<f64>,
    pub mean_control: Option<f64>,
    pub var_treated: Option<f64>,
    pub var_control: Option<f64>,
}

impl BatchSummary {
    /// Total units in the batch.
    pub fn units(&self) -> u64 {
        self.n_treated + self.n_control
    }

    /// Treatment share π_t = N₁ₜ / nₜ.
    pub fn treatment_share(&self) -> f64 {
        self.n_treated as f64 / self.units() as f64
    }
}

/// Why a batch cannot feed the batched statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValidityReason {
    Ok,
    EmptyArm,
    ZeroVarianceEstimate,
    InsufficientUnits,
}

/// Outcome of `validate_batch`; `reason == Ok` exactly when `valid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchValidity {
    pub valid: bool,
    pub reason: ValidityReason,
}

impl BatchValidity {
    pub fn ok() -> Self {
        BatchValidity {
            valid: true,
            reason: ValidityReason::Ok,
        }
    }

    pub fn invalid(reason: ValidityReason) -> Self {
        debug_assert!(reason != ValidityReason::Ok);
        BatchValidity {
            valid: false,
            reason,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("batch indices must be consecutive starting at 1; found {found} where {expected} was expected")]
    NonContiguousBatches { expected: u32, found: u32 },
    #[error("batch {batch} arm {arm}: raw unit count {raw} does not match summary count {summary}")]
    CountMismatch {
        batch: u32,
        arm: u8,
        raw: u64,
        summary: u64,
    },
    #[error("trace has no batches")]
    Empty,
}

/// An ordered experiment history: one summary per batch, the policy
/// that generated it, and optionally the per-unit records needed for
/// variance re-estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTrace {
    batches: Vec<BatchSummary>,
    policy_name: String,
    raw: Option<Vec<UnitRecord>>,
    variance_mode: VarianceMode,
}

impl ExperimentTrace {
    /// Builds a trace from already-computed summaries, checking the
    /// batch-index and raw-count invariants.
    pub fn new(
        batches: Vec<BatchSummary>,
        policy_name: impl Into<String>,
        raw: Option<Vec<UnitRecord>>,
        variance_mode: VarianceMode,
    ) -> Result<Self, ModelError> {
        if batches.is_empty() {
            return Err(ModelError::Empty);
        }
        for (i, b) in batches.iter().enumerate() {
            let expected = i as u32 + 1;
            if b.t != expected {
                return Err(ModelError::NonContiguousBatches {
                    expected,
                    found: b.t,
                });
            }
        }
        if let Some(records) = &raw {
            let mut counts = vec![[0u64; 2]; batches.len()];
            for r in records {
                let idx = r.batch as usize;
                if idx == 0 || idx > batches.len() {
                    return Err(ModelError::NonContiguousBatches {
                        expected: batches.len() as u32,
                        found: r.batch,
                    });
                }
                counts[idx - 1][r.arm.index() as usize] += 1;
            }
            for (b, c) in batches.iter().zip(&counts) {
                if c[1] != b.n_treated {
                    return Err(ModelError::CountMismatch {
                        batch: b.t,
                        arm: 1,
                        raw: c[1],
                        summary: b.n_treated,
                    });
                }
                if c[0] != b.n_control {
                    return Err(ModelError::CountMismatch {
                        batch: b.t,
                        arm: 0,
                        raw: c[0],
                        summary: b.n_control,
                    });
                }
            }
        }
        Ok(ExperimentTrace {
            batches,
            policy_name: policy_name.into(),
            raw,
            variance_mode,
        })
    }

    /// Builds summaries from per-unit records grouped by batch index.
    /// Records may arrive in any order; batch indices must cover 1..=T.
    pub fn from_units(
        records: Vec<UnitRecord>,
        policy_name: impl Into<String>,
        mode: VarianceMode,
        keep_raw: bool,
    ) -> Result<Self, ModelError> {
        if records.is_empty() {
            return Err(ModelError::Empty);
        }
        let t_max = records.iter().map(|r| r.batch).max().unwrap();
        let mut grouped: Vec<Vec<(ArmId, f64)>> = vec![Vec::new(); t_max as usize];
        for r in &records {
            if r.batch == 0 {
                return Err(ModelError::NonContiguousBatches {
                    expected: 1,
                    found: 0,
                });
            }
            grouped[(r.batch - 1) as usize].push((r.arm, r.value));
        }
        let mut batches = Vec::with_capacity(t_max as usize);
        for (i, outcomes) in grouped.iter().enumerate() {
            if outcomes.is_empty() {
                return Err(ModelError::NonContiguousBatches {
                    expected: i as u32 + 1,
                    found: i as u32 + 2,
                });
            }
            batches.push(summarize_batch(outcomes, i as u32 + 1, mode));
        }
        ExperimentTrace::new(
            batches,
            policy_name,
            if keep_raw { Some(records) } else { None },
            mode,
        )
    }

    pub fn batches(&self) -> &[BatchSummary] {
        &self.batches
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn policy_name(&self) -> &str {
        &self.policy_name
    }

    pub fn raw(&self) -> Option<&[UnitRecord]> {
        self.raw.as_deref()
    }

    /// Variance mode under which the stored batch variances were built.
    pub fn variance_mode(&self) -> VarianceMode {
        self.variance_mode
    }

    /// Per-unit outcome values of one batch/arm, in record order.
    /// Empty when raw records are absent.
    pub fn arm_values(&self, t: u32, arm: ArmId) -> Vec<f64> {
        match &self.raw {
            None => Vec::new(),
            Some(records) => records
                .iter()
                .filter(|r| r.batch == t && r.arm == arm)
                .map(|r| r.value)
                .collect(),
        }
    }
}

/// Streaming (Welford) accumulator for count, mean, and the centered
/// sum of squares of one arm within one batch.
#[derive(Debug, Clone, Copy, Default)]
struct ArmAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl ArmAccumulator {
    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    /// Arm variance estimate under a per-batch mode; `None` when the
    /// divisor would be zero.
    fn variance(&self, mode: VarianceMode) -> Option<f64> {
        let n = self.count as f64;
        match mode {
            VarianceMode::Sample | VarianceMode::Hc2 | VarianceMode::PooledAcrossBatches => {
                // HC2 with a mean-only model reduces exactly to the
                // unbiased estimator; pooled variances are substituted
                // at the trace level and start from the same sums.
                (self.count >= 2).then(|| self.m2 / (n - 1.0))
            }
            VarianceMode::Hc3 => (self.count >= 2).then(|| self.m2 * n / ((n - 1.0) * (n - 1.0))),
            VarianceMode::TrueKnown { .. } => None, // substituted by caller
        }
    }
}

/// Computes per-arm counts, means, and variance estimates for one
/// batch of (arm, outcome) pairs.
///
/// Arms with zero units get absent mean/variance. Validity is not
/// judged here; see [`validate_batch`].
pub fn summarize_batch(outcomes: &[(ArmId, f64)], t: u32, mode: VarianceMode) -> BatchSummary {
    assert!(!outcomes.is_empty(), "summarize_batch needs outcomes");
    let mut acc = [ArmAccumulator::default(), ArmAccumulator::default()];
    for &(arm, value) in outcomes {
        acc[arm.index() as usize].push(value);
    }
    let [control, treated] = acc;
    let (var_treated, var_control) = match mode {
        VarianceMode::TrueKnown {
            treatment: v1,
            control: v0,
        } => (
            (treated.count > 0).then_some(v1),
            (control.count > 0).then_some(v0),
        ),
        _ => (treated.variance(mode), control.variance(mode)),
    };
    BatchSummary {
        t,
        n_treated: treated.count,
        n_control: control.count,
        mean_treated: treated.mean(),
        mean_control: control.mean(),
        var_treated,
        var_control,
    }
}

/// Classifies whether a batch can contribute a period difference and a
/// positive variance estimate.
///
/// `EmptyArm` if either arm has no units; `InsufficientUnits` if either
/// arm is below `min_units_per_arm` (or a needed variance estimate is
/// absent); `ZeroVarianceEstimate` when both arm variances vanish so
/// the period variance is zero and the precision weight is undefined.
pub fn validate_batch(b: &BatchSummary, min_units_per_arm: u64) -> BatchValidity {
    if b.n_treated == 0 || b.n_control == 0 {
        return BatchValidity::invalid(ValidityReason::EmptyArm);
    }
    if b.n_treated < min_units_per_arm || b.n_control < min_units_per_arm {
        return BatchValidity::invalid(ValidityReason::InsufficientUnits);
    }
    let (v1, v0) = match (b.var_treated, b.var_control) {
        (Some(v1), Some(v0)) => (v1, v0),
        // Can only happen when min_units_per_arm < 2 under a feasible
        // mode: a single unit gives no variance estimate.
        _ => return BatchValidity::invalid(ValidityReason::InsufficientUnits),
    };
    if v1 == 0.0 && v0 == 0.0 {
        return BatchValidity::invalid(ValidityReason::ZeroVarianceEstimate);
    }
    BatchValidity::ok()
}
