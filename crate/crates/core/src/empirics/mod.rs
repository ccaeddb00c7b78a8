//! Monte Carlo and exact empirical measurements.

pub mod classify;
pub mod moments;
pub mod stats;
pub mod structure;
pub mod sweep;
pub mod verify;

pub use classify::{random_split, threshold_accuracy, threshold_accuracy_with, DecisionRule, Split, SplitFractions};
pub use moments::{monte_carlo_moments, MomentRow, MomentsReport};
pub use stats::{class_stats, mean_stderr, ClassStats};
pub use structure::{counterexample_search, neighborhood_profile, NeighborhoodProfile, VarianceIncrease};
pub use sweep::{layerwise_sweep, RuleChoice, SweepConfig, SweepInput, SweepRow};
pub use verify::{verify, RandomGraphSuite, Statement, VerificationReport, VerifyTarget};
