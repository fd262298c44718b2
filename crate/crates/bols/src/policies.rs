//! Batched adaptive assignment policies.
//!
//! Every policy assigns each unit of a batch independently given the
//! state accumulated from earlier batches; batch treatment counts are
//! therefore random, never deterministically rounded. State updates
//! happen once per batch, after all of its outcomes are observed.

use crate::model::ArmId;
use crate::rng::RandomStream;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("epsilon must lie in [0, 1], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("beta prior parameters must be positive, got alpha={alpha}, beta={beta}")]
    NonPositivePrior { alpha: f64, beta: f64 },
    #[error("fixed treatment share must lie strictly inside (0, 1), got {0}")]
    ShareOutOfRange(f64),
    #[error("bernoulli thompson sampling saw a non-binary outcome {0}")]
    NonBinaryOutcome(f64),
}

/// Assignment rule configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyConfig {
    /// Exploit the empirically best arm, explore uniformly with
    /// probability epsilon.
    EpsilonGreedy { epsilon: f64 },
    /// Per-unit posterior draws from per-arm Beta posteriors.
    BernoulliThompson { prior_alpha: f64, prior_beta: f64 },
    /// Non-adaptive i.i.d. Bernoulli(share) assignment.
    FixedShare { share: f64 },
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), PolicyError> {
        match *self {
            PolicyConfig::EpsilonGreedy { epsilon } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(PolicyError::EpsilonOutOfRange(epsilon));
                }
            }
            PolicyConfig::BernoulliThompson {
                prior_alpha,
                prior_beta,
            } => {
                if !(prior_alpha > 0.0 && prior_beta > 0.0) {
                    return Err(PolicyError::NonPositivePrior {
                        alpha: prior_alpha,
                        beta: prior_beta,
                    });
                }
            }
            PolicyConfig::FixedShare { share } => {
                if !(share > 0.0 && share < 1.0) {
                    return Err(PolicyError::ShareOutOfRange(share));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyConfig::EpsilonGreedy { .. } => "eps-greedy",
            PolicyConfig::BernoulliThompson { .. } => "thompson",
            PolicyConfig::FixedShare { .. } => "fixed",
        }
    }

    /// State before any outcome has been observed.
    pub fn initial_state(&self) -> PolicyState {
        let (a, b) = match *self {
            PolicyConfig::BernoulliThompson {
                prior_alpha,
                prior_beta,
            } => (prior_alpha, prior_beta),
            _ => (1.0, 1.0),
        };
        PolicyState {
            counts: [0, 0],
            sums: [0.0, 0.0],
            posterior: [BetaParams { alpha: a, beta: b }; 2],
        }
    }
}

/// Beta posterior parameters of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Accumulated history: per-arm counts and outcome sums (for greedy
/// means) and per-arm Beta posteriors (for Thompson sampling).
/// Indexed by `ArmId::index()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyState {
    counts: [u64; 2],
    sums: [f64; 2],
    posterior: [BetaParams; 2],
}

impl PolicyState {
    pub fn count(&self, arm: ArmId) -> u64 {
        self.counts[arm.index() as usize]
    }

    /// Historical sample mean of an arm, absent before any outcome.
    pub fn mean(&self, arm: ArmId) -> Option<f64> {
        let i = arm.index() as usize;
        (self.counts[i] > 0).then(|| self.sums[i] / self.counts[i] as f64)
    }

    pub fn posterior(&self, arm: ArmId) -> BetaParams {
        self.posterior[arm.index() as usize]
    }
}

/// Draws arm assignments for one batch of `batch_size` units.
pub fn assign_batch(
    cfg: &PolicyConfig,
    state: &PolicyState,
    batch_size: u32,
    rng: &mut RandomStream,
) -> Vec<ArmId> {
    assert!(batch_size >= 1, "batch size must be at least 1");
    let mut arms = Vec::with_capacity(batch_size as usize);
    match *cfg {
        PolicyConfig::FixedShare { share } => {
            for _ in 0..batch_size {
                arms.push(random_arm_with_share(rng, share));
            }
        }
        PolicyConfig::EpsilonGreedy { epsilon } => {
            // Greedy comparison is strict; an arm with no history yet is
            // treated as tied with the current best, and ties resolve
            // uniformly at random.
            let greedy: Option<ArmId> = match (state.mean(ArmId::Control), state.mean(ArmId::Treatment)) {
                (Some(m0), Some(m1)) if m1 > m0 => Some(ArmId::Treatment),
                (Some(m0), Some(m1)) if m0 > m1 => Some(ArmId::Control),
                _ => None, // tie or missing history on either side
            };
            for _ in 0..batch_size {
                let explore = epsilon > 0.0 && rng.bernoulli(epsilon);
                let arm = if explore {
                    random_arm_with_share(rng, 0.5)
                } else {
                    match greedy {
                        Some(arm) => arm,
                        None => random_arm_with_share(rng, 0.5),
                    }
                };
                arms.push(arm);
            }
        }
        PolicyConfig::BernoulliThompson { .. } => {
            let p0 = state.posterior(ArmId::Control);
            let p1 = state.posterior(ArmId::Treatment);
            for _ in 0..batch_size {
                let theta0 = rng.beta(p0.alpha, p0.beta);
                let theta1 = rng.beta(p1.alpha, p1.beta);
                arms.push(if theta1 > theta0 {
                    ArmId::Treatment
                } else {
                    ArmId::Control
                });
            }
        }
    }
    arms
}

#[inline]
fn random_arm_with_share(rng: &mut RandomStream, share: f64) -> ArmId {
    if rng.bernoulli(share) {
        ArmId::Treatment
    } else {
        ArmId::Control
    }
}

/// Folds one batch of observed outcomes into the state. Counts and
/// sums always update; Beta posteriors update conjugately and require
/// binary outcomes under Thompson sampling.
pub fn update_state(
    cfg: &PolicyConfig,
    state: &PolicyState,
    batch_outcomes: &[(ArmId, f64)],
) -> Result<PolicyState, PolicyError> {
    let mut next = *state;
    let thompson = matches!(cfg, PolicyConfig::BernoulliThompson { .. });
    for &(arm, value) in batch_outcomes {
        let i = arm.index() as usize;
        next.counts[i] += 1;
        next.sums[i] += value;
        if thompson {
            if value == 1.0 {
                next.posterior[i].alpha += 1.0;
            } else if value == 0.0 {
                next.posterior[i].beta += 1.0;
            } else {
                return Err(PolicyError::NonBinaryOutcome(value));
            }
        }
    }
    Ok(next)
}
