//! Test statistics for batched adaptive experiments.
//!
//! Three statistic families share one report shape:
//!
//! * `het_bols` — the precision-weighted batched statistic: per-period
//!   z-scores built from per-arm, per-period variance estimates and
//!   combined as Z = T^(−1/2) Σ z_t. Robust to unequal arm variances.
//! * `hom_bols` — the batched statistic derived under equal arm
//!   variances, using a per-batch (or globally) pooled residual
//!   variance.
//! * `robust_ols` — a pooled regression of outcome on a treatment
//!   indicator over all units with a Huber–White sandwich standard
//!   error (HC0/HC2/HC3).
//!
//! The weighted point estimate uses precision weights w_t = v̂_t^(−1/2),
//! S = Σ w_s, so SE(Δ̂) = √T / S and both routes to the combined
//! statistic — the z-score average and (Δ̂ − c)/SE — agree identically.

use crate::model::{validate_batch, BatchSummary, ExperimentTrace, ValidityReason};
use crate::num::{normal_cdf, normal_quantile, two_sided_p};
use thiserror::Error;

/// How per-arm, per-period outcome variances are estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceMode {
    /// Unbiased within-period estimate, divisor N−1.
    Sample,
    /// Leverage-adjusted (1−h)⁻¹ residuals; identical to `Sample` for a
    /// per-arm mean model, kept for parity with the regression flavors.
    Hc2,
    /// Leverage-adjusted (1−h)⁻² residuals, divisor (N−1)²/N.
    Hc3,
    /// Arm variances pooled over all periods after centering within
    /// each period; requires per-unit records.
    PooledAcrossBatches,
    /// Known population variances; simulation oracle mode only.
    TrueKnown { treatment: f64, control: f64 },
}

impl VarianceMode {
    pub fn label(&self) -> &'static str {
        match self {
            VarianceMode::Sample => "sample",
            VarianceMode::Hc2 => "hc2",
            VarianceMode::Hc3 => "hc3",
            VarianceMode::PooledAcrossBatches => "pooled",
            VarianceMode::TrueKnown { .. } => "true",
        }
    }

    /// Smallest per-arm batch count under which the mode can produce a
    /// variance estimate (known variances need only a mean).
    pub fn min_units_per_arm(&self) -> u64 {
        match self {
            VarianceMode::TrueKnown { .. } => 1,
            _ => 2,
        }
    }
}

/// Statistic families produced by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatisticKind {
    HetBols,
    HomBols,
    RobustOls,
}

impl StatisticKind {
    pub fn label(&self) -> &'static str {
        match self {
            StatisticKind::HetBols => "het-bols",
            StatisticKind::HomBols => "hom-bols",
            StatisticKind::RobustOls => "robust-ols",
        }
    }
}

/// Sandwich flavor for the pooled regression statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcFlavor {
    Hc0,
    Hc2,
    Hc3,
}

impl HcFlavor {
    pub fn label(&self) -> &'static str {
        match self {
            HcFlavor::Hc0 => "hc0",
            HcFlavor::Hc2 => "hc2",
            HcFlavor::Hc3 => "hc3",
        }
    }
}

/// Residual pooling for the homoskedastic statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomPooling {
    /// One residual variance per batch, divisor nₜ − 2.
    PerBatch,
    /// A single residual variance across all batches, divisor N − 2T.
    Global,
}

/// Alternative hypothesis for the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alternative {
    #[default]
    TwoSided,
    Greater,
    Less,
}

/// Null value, level, and sidedness of the test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    pub null_value: f64,
    pub alpha: f64,
    pub alternative: Alternative,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            null_value: 0.0,
            alpha: 0.05,
            alternative: Alternative::TwoSided,
        }
    }
}

impl TestConfig {
    pub fn new(null_value: f64, alpha: f64) -> Self {
        TestConfig {
            null_value,
            alpha,
            alternative: Alternative::TwoSided,
        }
    }
}

/// Why a report carries no statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportInvalid {
    /// Some batch failed validation.
    Batch { t: u32, reason: ValidityReason },
    /// A period variance estimate was zero or negative.
    DegenerateVariance { t: u32 },
    /// The pooled regression has no residual variation.
    ZeroStandardError,
    /// One arm received no units at all.
    EmptyPooledArm,
}

/// Per-period detail row of a batched statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerBatchStat {
    pub t: u32,
    /// Period difference in sample means.
    pub diff: f64,
    /// Period difference variance estimate v̂ₜ.
    pub variance: f64,
    /// Normalized precision weight wₜ/S.
    pub weight: f64,
    /// Period z-score.
    pub z: f64,
}

/// Point estimate, standard error, test statistic, p-value, and
/// confidence interval for one statistic family, plus per-period
/// detail. Numeric fields are absent exactly when `valid` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub statistic: StatisticKind,
    /// Which variance estimator produced the report (e.g. "sample",
    /// "hc3", "hom-per-batch", "hc0").
    pub variance_label: String,
    pub null_value: f64,
    pub alpha: f64,
    pub valid: bool,
    pub invalid: Option<ReportInvalid>,
    pub delta_hat: Option<f64>,
    pub se: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub per_batch: Vec<PerBatchStat>,
}

impl EstimatorReport {
    fn invalid(
        statistic: StatisticKind,
        variance_label: impl Into<String>,
        cfg: &TestConfig,
        why: ReportInvalid,
    ) -> Self {
        EstimatorReport {
            statistic,
            variance_label: variance_label.into(),
            null_value: cfg.null_value,
            alpha: cfg.alpha,
            valid: false,
            invalid: Some(why),
            delta_hat: None,
            se: None,
            z: None,
            p_value: None,
            ci_low: None,
            ci_high: None,
            per_batch: Vec::new(),
        }
    }

    /// Rejection decision at the report's own level: p ≤ α.
    pub fn rejects(&self) -> Option<bool> {
        self.p_value.map(|p| p <= self.alpha)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("batch {t} cannot feed the statistic: {reason:?}")]
    InvalidBatch { t: u32, reason: ValidityReason },
    #[error("period {t} variance estimate {value} is not positive")]
    DegenerateVariance { t: u32, value: f64 },
    #[error("need at least {needed} outcomes, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("variance mode `{mode}` needs per-unit records; re-run ingestion keeping raw outcomes")]
    MissingRawOutcomes { mode: &'static str },
    #[error("no degrees of freedom left for a pooled variance")]
    NoDegreesOfFreedom,
}

#[inline]
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Period difference in sample means Δ̂ₜ = ȳ₁ₜ − ȳ₀ₜ.
pub fn batch_diff(b: &BatchSummary) -> Result<f64, EstimatorError> {
    match (b.mean_treated, b.mean_control) {
        (Some(m1), Some(m0)) => Ok(m1 - m0),
        _ => Err(EstimatorError::InvalidBatch {
            t: b.t,
            reason: ValidityReason::EmptyArm,
        }),
    }
}

/// Period difference variance v̂ₜ = σ̂²₁ₜ/N₁ₜ + σ̂²₀ₜ/N₀ₜ.
///
/// The treatment-share form (1/nₜ)(σ̂²₁ₜ/πₜ + σ̂²₀ₜ/(1−πₜ)) is evaluated
/// alongside and checked to 1e-12 relative.
pub fn batch_variance(b: &BatchSummary) -> Result<f64, EstimatorError> {
    if b.n_treated == 0 || b.n_control == 0 {
        return Err(EstimatorError::InvalidBatch {
            t: b.t,
            reason: ValidityReason::EmptyArm,
        });
    }
    let (v1, v0) = match (b.var_treated, b.var_control) {
        (Some(v1), Some(v0)) => (v1, v0),
        _ => {
            return Err(EstimatorError::InvalidBatch {
                t: b.t,
                reason: ValidityReason::InsufficientUnits,
            })
        }
    };
    let direct = v1 / b.n_treated as f64 + v0 / b.n_control as f64;
    debug_assert!(
        close(direct, batch_variance_share_form(b).unwrap(), 1e-12),
        "variance forms disagree in batch {}",
        b.t
    );
    Ok(direct)
}

/// The algebraically equivalent treatment-share form of [`batch_variance`].
pub fn batch_variance_share_form(b: &BatchSummary) -> Result<f64, EstimatorError> {
    if b.n_treated == 0 || b.n_control == 0 {
        return Err(EstimatorError::InvalidBatch {
            t: b.t,
            reason: ValidityReason::EmptyArm,
        });
    }
    let (v1, v0) = match (b.var_treated, b.var_control) {
        (Some(v1), Some(v0)) => (v1, v0),
        _ => {
            return Err(EstimatorError::InvalidBatch {
                t: b.t,
                reason: ValidityReason::InsufficientUnits,
            })
        }
    };
    let n = b.units() as f64;
    let share = b.treatment_share();
    Ok((v1 / share + v0 / (1.0 - share)) / n)
}

/// Per-arm within-period variance estimate under a per-period mode.
pub fn estimate_arm_variance(values: &[f64], mode: VarianceMode) -> Result<f64, EstimatorError> {
    let n = values.len();
    if n < 2 {
        return Err(EstimatorError::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    match mode {
        VarianceMode::Sample => {
            Ok(values.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (nf - 1.0))
        }
        // Mean-model leverage is h = 1/N for every unit.
        VarianceMode::Hc2 => {
            let h = 1.0 / nf;
            Ok(values
                .iter()
                .map(|y| (y - mean).powi(2) / (1.0 - h))
                .sum::<f64>()
                / nf)
        }
        VarianceMode::Hc3 => {
            let h = 1.0 / nf;
            Ok(values
                .iter()
                .map(|y| (y - mean).powi(2) / ((1.0 - h) * (1.0 - h)))
                .sum::<f64>()
                / nf)
        }
        VarianceMode::PooledAcrossBatches => Err(EstimatorError::MissingRawOutcomes {
            mode: "pooled (use pooled_arm_variance over all batches)",
        }),
        VarianceMode::TrueKnown { .. } => Err(EstimatorError::MissingRawOutcomes {
            mode: "true (known variances are injected, not estimated)",
        }),
    }
}

/// Arm variance pooled across periods: center within each period, then
/// divide the pooled centered sum of squares by (total count − number
/// of contributing periods).
pub fn pooled_arm_variance(per_batch_values: &[Vec<f64>]) -> Result<f64, EstimatorError> {
    let mut ss = 0.0;
    let mut total = 0usize;
    let mut groups = 0usize;
    for values in per_batch_values {
        if values.is_empty() {
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        ss += values.iter().map(|y| (y - mean).powi(2)).sum::<f64>();
        total += values.len();
        groups += 1;
    }
    if total <= groups || groups == 0 {
        return Err(EstimatorError::NoDegreesOfFreedom);
    }
    Ok(ss / (total - groups) as f64)
}

/// Precision weights from period variances: raw wₜ = v̂ₜ^(−1/2), their
/// sum S, and the normalized weights wₜ/S.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionWeights {
    pub raw: Vec<f64>,
    pub total: f64,
    pub normalized: Vec<f64>,
}

pub fn precision_weights(variances: &[f64]) -> Result<PrecisionWeights, EstimatorError> {
    let mut raw = Vec::with_capacity(variances.len());
    for (i, &v) in variances.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(EstimatorError::DegenerateVariance {
                t: i as u32 + 1,
                value: v,
            });
        }
        raw.push(1.0 / v.sqrt());
    }
    let total: f64 = raw.iter().sum();
    let normalized: Vec<f64> = raw.iter().map(|w| w / total).collect();
    Ok(PrecisionWeights {
        raw,
        total,
        normalized,
    })
}

/// Weighted point estimate Δ̂ = Σ (wₜ/S) Δ̂ₜ.
pub fn weighted_delta(diffs: &[f64], normalized_weights: &[f64]) -> f64 {
    assert_eq!(diffs.len(), normalized_weights.len());
    diffs
        .iter()
        .zip(normalized_weights)
        .map(|(d, w)| w * d)
        .sum()
}

/// SE(Δ̂) = √T / S; the realized-weight variance identity
/// Σ (wₜ/S)² v̂ₜ = T/S² holds by construction and is asserted by callers.
pub fn weighted_se(periods: usize, total_weight: f64) -> f64 {
    assert!(periods >= 1 && total_weight > 0.0);
    (periods as f64).sqrt() / total_weight
}

/// Two-sided (1−α) interval around a point estimate.
pub fn confidence_interval(delta_hat: f64, se: f64, alpha: f64) -> (f64, f64) {
    let half = normal_quantile(1.0 - alpha / 2.0) * se;
    (delta_hat - half, delta_hat + half)
}

fn p_value_for(z: f64, alternative: Alternative) -> f64 {
    match alternative {
        Alternative::TwoSided => two_sided_p(z),
        Alternative::Greater => 1.0 - normal_cdf(z),
        Alternative::Less => normal_cdf(z),
    }
}

/// Combines per-period (t, Δ̂ₜ, v̂ₜ) rows into a full report.
fn combine_periods(
    statistic: StatisticKind,
    variance_label: &str,
    rows: &[(u32, f64, f64)],
    cfg: &TestConfig,
) -> EstimatorReport {
    let variances: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let weights = match precision_weights(&variances) {
        Ok(w) => w,
        Err(EstimatorError::DegenerateVariance { t, .. }) => {
            let t = rows[(t - 1) as usize].0;
            return EstimatorReport::invalid(
                statistic,
                variance_label,
                cfg,
                ReportInvalid::DegenerateVariance { t },
            );
        }
        Err(_) => unreachable!("precision_weights only fails on degenerate variances"),
    };

    let periods = rows.len();
    let diffs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let per_batch: Vec<PerBatchStat> = rows
        .iter()
        .enumerate()
        .map(|(i, &(t, diff, variance))| PerBatchStat {
            t,
            diff,
            variance,
            weight: weights.normalized[i],
            z: (diff - cfg.null_value) * weights.raw[i],
        })
        .collect();

    // wₜ² v̂ₜ = 1 by construction.
    debug_assert!(per_batch
        .iter()
        .enumerate()
        .all(|(i, b)| close(weights.raw[i] * weights.raw[i] * b.variance, 1.0, 1e-12)));

    let z = per_batch.iter().map(|b| b.z).sum::<f64>() / (periods as f64).sqrt();
    let delta_hat = weighted_delta(&diffs, &weights.normalized);
    let se = weighted_se(periods, weights.total);

    // Same statistic through the estimate/SE route, and the realized
    // variance identity Σ (wₜ/S)² v̂ₜ = T/S².
    let z_ratio = (delta_hat - cfg.null_value) / se;
    debug_assert!(close(z, z_ratio, 1e-10), "z forms disagree: {z} vs {z_ratio}");
    debug_assert!({
        let realized: f64 = per_batch
            .iter()
            .map(|b| b.weight * b.weight * b.variance)
            .sum();
        close(realized, periods as f64 / (weights.total * weights.total), 1e-12)
    });

    let p_value = p_value_for(z, cfg.alternative);
    let (ci_low, ci_high) = confidence_interval(delta_hat, se, cfg.alpha);

    if cfg.alternative == Alternative::TwoSided {
        let crit = normal_quantile(1.0 - cfg.alpha / 2.0);
        if (z.abs() - crit).abs() > 1e-9 {
            let covers = ci_low <= cfg.null_value && cfg.null_value <= ci_high;
            debug_assert_eq!(covers, z.abs() <= crit);
        }
    }

    EstimatorReport {
        statistic,
        variance_label: variance_label.to_string(),
        null_value: cfg.null_value,
        alpha: cfg.alpha,
        valid: true,
        invalid: None,
        delta_hat: Some(delta_hat),
        se: Some(se),
        z: Some(z),
        p_value: Some(p_value),
        ci_low: Some(ci_low),
        ci_high: Some(ci_high),
        per_batch,
    }
}

/// Per-batch (var_treated, var_control) pairs under the requested mode,
/// recomputed from per-unit records when the stored summaries were
/// built under a different mode.
fn mode_variances(
    trace: &ExperimentTrace,
    mode: VarianceMode,
) -> Result<Vec<(Option<f64>, Option<f64>)>, EstimatorError> {
    use crate::model::ArmId;

    if let VarianceMode::TrueKnown { treatment, control } = mode {
        return Ok(trace
            .batches()
            .iter()
            .map(|b| {
                (
                    (b.n_treated > 0).then_some(treatment),
                    (b.n_control > 0).then_some(control),
                )
            })
            .collect());
    }

    if trace.variance_mode() == mode {
        return Ok(trace
            .batches()
            .iter()
            .map(|b| (b.var_treated, b.var_control))
            .collect());
    }

    if trace.raw().is_none() {
        return Err(EstimatorError::MissingRawOutcomes { mode: mode.label() });
    }

    let per_batch: Vec<(Vec<f64>, Vec<f64>)> = trace
        .batches()
        .iter()
        .map(|b| {
            (
                trace.arm_values(b.t, ArmId::Treatment),
                trace.arm_values(b.t, ArmId::Control),
            )
        })
        .collect();

    if mode == VarianceMode::PooledAcrossBatches {
        let treated: Vec<Vec<f64>> = per_batch.iter().map(|(t, _)| t.clone()).collect();
        let control: Vec<Vec<f64>> = per_batch.iter().map(|(_, c)| c.clone()).collect();
        let v1 = pooled_arm_variance(&treated)?;
        let v0 = pooled_arm_variance(&control)?;
        return Ok(per_batch
            .iter()
            .map(|(t, c)| {
                (
                    (!t.is_empty()).then_some(v1),
                    (!c.is_empty()).then_some(v0),
                )
            })
            .collect());
    }

    Ok(per_batch
        .iter()
        .map(|(t, c)| {
            (
                estimate_arm_variance(t, mode).ok(),
                estimate_arm_variance(c, mode).ok(),
            )
        })
        .collect())
}

/// The heteroskedasticity-robust batched statistic.
///
/// Invalid batches produce a `valid = false` report; a missing raw
/// record set (when the mode needs one) is a hard error.
pub fn het_bols(
    trace: &ExperimentTrace,
    cfg: &TestConfig,
    mode: VarianceMode,
) -> Result<EstimatorReport, EstimatorError> {
    let variances = mode_variances(trace, mode)?;
    let min_units = mode.min_units_per_arm();

    let mut rows = Vec::with_capacity(trace.num_batches());
    for (b, &(v1, v0)) in trace.batches().iter().zip(&variances) {
        let with_mode = BatchSummary {
            var_treated: v1,
            var_control: v0,
            ..b.clone()
        };
        let validity = validate_batch(&with_mode, min_units);
        if !validity.valid {
            return Ok(EstimatorReport::invalid(
                StatisticKind::HetBols,
                mode.label(),
                cfg,
                ReportInvalid::Batch {
                    t: b.t,
                    reason: validity.reason,
                },
            ));
        }
        let diff = batch_diff(&with_mode).expect("validated batch has both means");
        let variance = batch_variance(&with_mode).expect("validated batch has both variances");
        rows.push((b.t, diff, variance));
    }
    Ok(combine_periods(
        StatisticKind::HetBols,
        mode.label(),
        &rows,
        cfg,
    ))
}

/// The batched statistic derived under homoskedasticity: per-period
/// pooled residual variance σ̂²ₜ (divisor nₜ − 2), period variance
/// σ̂²ₜ(1/N₁ₜ + 1/N₀ₜ).
pub fn hom_bols(
    trace: &ExperimentTrace,
    cfg: &TestConfig,
    pooling: HomPooling,
) -> Result<EstimatorReport, EstimatorError> {
    let label = match pooling {
        HomPooling::PerBatch => "hom-per-batch",
        HomPooling::Global => "hom-global",
    };
    // The pooled residual variance needs unbiased per-arm pieces:
    // Σ(y−ȳ)² = (N−1)·s², available from Sample-mode summaries or raw.
    let sample_vars = mode_variances(trace, VarianceMode::Sample)?;

    let mut pieces = Vec::with_capacity(trace.num_batches());
    for (b, &(v1, v0)) in trace.batches().iter().zip(&sample_vars) {
        let with_mode = BatchSummary {
            var_treated: v1,
            var_control: v0,
            ..b.clone()
        };
        let validity = validate_batch(&with_mode, 2);
        if !validity.valid {
            return Ok(EstimatorReport::invalid(
                StatisticKind::HomBols,
                label,
                cfg,
                ReportInvalid::Batch {
                    t: b.t,
                    reason: validity.reason,
                },
            ));
        }
        let diff = batch_diff(&with_mode).expect("validated batch has both means");
        let n1 = b.n_treated as f64;
        let n0 = b.n_control as f64;
        let ss = (n1 - 1.0) * v1.unwrap() + (n0 - 1.0) * v0.unwrap();
        pieces.push((b.t, diff, ss, n1, n0));
    }

    let rows: Vec<(u32, f64, f64)> = match pooling {
        HomPooling::PerBatch => pieces
            .iter()
            .map(|&(t, diff, ss, n1, n0)| {
                let pooled = ss / (n1 + n0 - 2.0);
                (t, diff, pooled * (1.0 / n1 + 1.0 / n0))
            })
            .collect(),
        HomPooling::Global => {
            let total_ss: f64 = pieces.iter().map(|p| p.2).sum();
            let total_df: f64 = pieces.iter().map(|p| p.3 + p.4 - 2.0).sum();
            let pooled = total_ss / total_df;
            pieces
                .iter()
                .map(|&(t, diff, _, n1, n0)| (t, diff, pooled * (1.0 / n1 + 1.0 / n0)))
                .collect()
        }
    };
    Ok(combine_periods(StatisticKind::HomBols, label, &rows, cfg))
}

/// Heteroskedasticity-robust pooled regression statistic: outcome on an
/// intercept and a treatment indicator over every unit of every batch.
///
/// For this design the coefficient is the difference of pooled arm
/// means and the sandwich variance reduces to
/// Σ₁ ẽᵢ²/N₁² + Σ₀ ẽᵢ²/N₀² with leverage 1/Nₐ per arm.
pub fn robust_ols(
    trace: &ExperimentTrace,
    cfg: &TestConfig,
    flavor: HcFlavor,
) -> Result<EstimatorReport, EstimatorError> {
    let records = trace
        .raw()
        .ok_or(EstimatorError::MissingRawOutcomes { mode: "robust-ols" })?;

    let mut n = [0u64; 2];
    let mut sum = [0.0f64; 2];
    for r in records {
        let i = r.arm.index() as usize;
        n[i] += 1;
        sum[i] += r.value;
    }
    if n[0] == 0 || n[1] == 0 {
        return Ok(EstimatorReport::invalid(
            StatisticKind::RobustOls,
            flavor.label(),
            cfg,
            ReportInvalid::EmptyPooledArm,
        ));
    }
    let mean = [sum[0] / n[0] as f64, sum[1] / n[1] as f64];
    let coef = mean[1] - mean[0];

    let mut rss = [0.0f64; 2];
    for r in records {
        let i = r.arm.index() as usize;
        let e = r.value - mean[i];
        rss[i] += e * e;
    }
    let adj = |arm: usize| -> f64 {
        let h = 1.0 / n[arm] as f64;
        match flavor {
            HcFlavor::Hc0 => 1.0,
            HcFlavor::Hc2 => 1.0 / (1.0 - h),
            HcFlavor::Hc3 => 1.0 / ((1.0 - h) * (1.0 - h)),
        }
    };
    let variance = rss[1] * adj(1) / (n[1] as f64 * n[1] as f64)
        + rss[0] * adj(0) / (n[0] as f64 * n[0] as f64);
    if !(variance > 0.0) {
        return Ok(EstimatorReport::invalid(
            StatisticKind::RobustOls,
            flavor.label(),
            cfg,
            ReportInvalid::ZeroStandardError,
        ));
    }
    let se = variance.sqrt();
    let z = (coef - cfg.null_value) / se;
    let p_value = p_value_for(z, cfg.alternative);
    let (ci_low, ci_high) = confidence_interval(coef, se, cfg.alpha);

    Ok(EstimatorReport {
        statistic: StatisticKind::RobustOls,
        variance_label: flavor.label().to_string(),
        null_value: cfg.null_value,
        alpha: cfg.alpha,
        valid: true,
        invalid: None,
        delta_hat: Some(coef),
        se: Some(se),
        z: Some(z),
        p_value: Some(p_value),
        ci_low: Some(ci_low),
        ci_high: Some(ci_high),
        per_batch: Vec::new(),
    })
}

/// Closed-form weight-structure cells: homoskedastic/heteroskedastic
/// crossed with non-adaptive (fixed share) and adaptive (realized
/// share) designs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightTableCase {
    HomoskedasticNonAdaptive { sigma2: f64, share: f64 },
    HomoskedasticAdaptive { sigma2: f64 },
    HeteroskedasticNonAdaptive { share: f64 },
    HeteroskedasticAdaptive,
}

/// Per-period inputs for [`weight_table_cell`]. Fields not used by a
/// case (e.g. arm variances in the homoskedastic cells) are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightTableBatch {
    pub units: u64,
    pub share: f64,
    pub var_treated: f64,
    pub var_control: f64,
}

/// Evaluates one weight-structure cell and returns normalized weights
/// wₜ/S. The heteroskedastic-adaptive cell agrees with
/// `precision_weights` applied to the period variances to 1e-12.
pub fn weight_table_cell(
    case: WeightTableCase,
    batches: &[WeightTableBatch],
) -> Result<Vec<f64>, EstimatorError> {
    let variances: Vec<f64> = batches
        .iter()
        .map(|b| {
            let n = b.units as f64;
            match case {
                WeightTableCase::HomoskedasticNonAdaptive { sigma2, share } => {
                    sigma2 / (n * share * (1.0 - share))
                }
                WeightTableCase::HomoskedasticAdaptive { sigma2 } => {
                    sigma2 / (n * b.share * (1.0 - b.share))
                }
                WeightTableCase::HeteroskedasticNonAdaptive { share } => {
                    (b.var_treated / share + b.var_control / (1.0 - share)) / n
                }
                WeightTableCase::HeteroskedasticAdaptive => {
                    (b.var_treated / b.share + b.var_control / (1.0 - b.share)) / n
                }
            }
        })
        .collect();
    Ok(precision_weights(&variances)?.normalized)
}
