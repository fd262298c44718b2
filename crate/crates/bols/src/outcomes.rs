//! Reward distributions for the two experiment arms.

use crate::rng::RandomStream;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("gaussian standard deviation must be positive, got {0}")]
    NonPositiveSd(f64),
    #[error("bernoulli success probability must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("cannot parse distribution `{0}`; expected `gauss:<mean>:<sd>` or `bern:<p>`")]
    Parse(String),
}

/// Outcome model of a single arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmDistribution {
    Gaussian { mean: f64, sd: f64 },
    Bernoulli { p: f64 },
}

impl ArmDistribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self, DistributionError> {
        if !(sd > 0.0) {
            return Err(DistributionError::NonPositiveSd(sd));
        }
        Ok(ArmDistribution::Gaussian { mean, sd })
    }

    pub fn bernoulli(p: f64) -> Result<Self, DistributionError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DistributionError::ProbabilityOutOfRange(p));
        }
        Ok(ArmDistribution::Bernoulli { p })
    }

    /// One outcome draw. Bernoulli outcomes are exactly 0.0 or 1.0.
    #[inline]
    pub fn draw(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            ArmDistribution::Gaussian { mean, sd } => rng.gaussian(mean, sd),
            ArmDistribution::Bernoulli { p } => {
                if rng.bernoulli(p) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Expected outcome.
    pub fn mean(&self) -> f64 {
        match *self {
            ArmDistribution::Gaussian { mean, .. } => mean,
            ArmDistribution::Bernoulli { p } => p,
        }
    }

    /// Population outcome variance: σ² or p(1−p).
    pub fn true_variance(&self) -> f64 {
        match *self {
            ArmDistribution::Gaussian { sd, .. } => sd * sd,
            ArmDistribution::Bernoulli { p } => p * (1.0 - p),
        }
    }

    /// Whether outcomes are restricted to {0, 1}.
    pub fn is_binary(&self) -> bool {
        matches!(self, ArmDistribution::Bernoulli { .. })
    }
}

impl FromStr for ArmDistribution {
    type Err = DistributionError;

    /// Parses `gauss:<mean>:<sd>` or `bern:<p>` (as used by CLI flags
    /// and grid config files).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DistributionError::Parse(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["gauss", mean, sd] => {
                let mean: f64 = mean.trim().parse().map_err(|_| err())?;
                let sd: f64 = sd.trim().parse().map_err(|_| err())?;
                ArmDistribution::gaussian(mean, sd)
            }
            ["bern", p] => {
                let p: f64 = p.trim().parse().map_err(|_| err())?;
                ArmDistribution::bernoulli(p)
            }
            _ => Err(err()),
        }
    }
}

impl fmt::Display for ArmDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ArmDistribution::Gaussian { mean, sd } => write!(f, "gauss:{mean}:{sd}"),
            ArmDistribution::Bernoulli { p } => write!(f, "bern:{p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_certain_success() {
        let d = ArmDistribution::bernoulli(1.0).unwrap();
        let mut rng = RandomStream::from_key(3);
        for _ in 0..1000 {
            assert_eq!(d.draw(&mut rng), 1.0);
        }
    }

    #[test]
    fn gaussian_rejects_zero_sd() {
        assert_eq!(
            ArmDistribution::gaussian(1.0, 0.0),
            Err(DistributionError::NonPositiveSd(0.0))
        );
        assert!(ArmDistribution::gaussian(1.0, -1.0).is_err());
    }

    #[test]
    fn gaussian_sample_moments() {
        // 10⁶ draws from N(1, 4²): mean within 1 ± 0.02 (5σ/√n),
        // sd within 4 ± 0.02.
        let d = ArmDistribution::gaussian(1.0, 4.0).unwrap();
        let mut rng = RandomStream::from_key(99);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = d.draw(&mut rng);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let sd = (sumsq / n as f64 - mean * mean).sqrt();
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!((sd - 4.0).abs() < 0.02, "sd {sd}");
    }

    #[test]
    fn true_variances() {
        assert_eq!(
            ArmDistribution::gaussian(1.0, 4.0).unwrap().true_variance(),
            16.0
        );
        assert_eq!(
            ArmDistribution::bernoulli(0.5).unwrap().true_variance(),
            0.25
        );
        // The mechanical heteroskedasticity of a (0.7, 0.4) margin.
        let v1 = ArmDistribution::bernoulli(0.7).unwrap().true_variance();
        let v0 = ArmDistribution::bernoulli(0.4).unwrap().true_variance();
        assert!((v1 - 0.21).abs() < 1e-15);
        assert!((v0 - 0.24).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_draws_are_binary_with_matching_variance() {
        let p = 0.3;
        let d = ArmDistribution::bernoulli(p).unwrap();
        let mut rng = RandomStream::from_key(123);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq_dev = 0.0;
        for _ in 0..n {
            let x = d.draw(&mut rng);
            assert!(x == 0.0 || x == 1.0);
            sum += x;
            sumsq_dev += (x - p) * (x - p);
        }
        let emp_var = sumsq_dev / n as f64;
        // tolerance 5·√(Var[(X−p)²]/n)
        let q = p * (1.0 - p);
        let var_sq_dev = q * ((1.0 - p).powi(3) + p.powi(3)) - q * q;
        assert!((emp_var - q).abs() < 5.0 * (var_sq_dev / n as f64).sqrt());
        let _ = sum;
    }

    #[test]
    fn identical_seeds_identical_sequences() {
        let d = ArmDistribution::gaussian(0.0, 1.0).unwrap();
        let mut a = RandomStream::from_key(77);
        let mut b = RandomStream::from_key(77);
        for _ in 0..100 {
            assert_eq!(d.draw(&mut a), d.draw(&mut b));
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["gauss:1:4", "bern:0.7", "gauss:-2.5:0.1"] {
            let d: ArmDistribution = s.parse().unwrap();
            let again: ArmDistribution = d.to_string().parse().unwrap();
            assert_eq!(d, again);
        }
        assert!("gauss:1".parse::<ArmDistribution>().is_err());
        assert!("bern:1.5".parse::<ArmDistribution>().is_err());
        assert!("what:1".parse::<ArmDistribution>().is_err());
    }
}
