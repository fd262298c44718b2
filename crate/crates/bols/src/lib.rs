//! Inference toolkit for batched adaptive experiments.
//!
//! The library simulates two-arm batched experiments run under adaptive
//! assignment policies (ε-greedy, Bernoulli Thompson sampling, or a
//! fixed share), computes precision-weighted batched test statistics
//! that stay valid under unequal arm variances, and sweeps Monte Carlo
//! grids of designs to tabulate empirical rejection rates.
//!
//! Start with the runnable programs in `examples/`; each one covers a
//! major capability end to end. The `bols` binary exposes the same
//! functionality as a small CLI (`simulate`, `analyze`, `mc-grid`,
//! `density`).

pub mod cli;
pub mod estimators;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod num;
pub mod outcomes;
pub mod policies;
pub mod rng;

pub use estimators::{
    het_bols, hom_bols, robust_ols, EstimatorReport, HcFlavor, HomPooling, StatisticKind,
    TestConfig, VarianceMode,
};
pub use model::{ArmId, BatchSummary, ExperimentTrace, UnitRecord};
pub use montecarlo::{ks_distance, run_cell, run_experiment, run_grid, McGridSpec};
pub use outcomes::ArmDistribution;
pub use policies::PolicyConfig;
pub use rng::RandomStream;
