//! Submodular participatory budgeting.
//!
//! Voters hold monotone submodular utilities over funded projects. Their
//! preferences are elicited as group rankings (by greedy marginal value or by
//! stand-alone value) or as threshold approvals, aggregated by randomized
//! rules, and scored by exact expected welfare against the welfare optimum.

pub mod aggregation;
pub mod elicitation;
mod error;
pub mod experiment;
pub mod file;
pub mod instance;
pub mod optimize;
pub mod partition;
pub mod rng;
pub mod utility;

pub use aggregation::{
    aggregate_ranking, aggregate_ranking_all_groups, aggregate_threshold, expected_welfare, rule_a_ranking,
    rule_a_threshold, rule_b_uniform, SelectionDistribution,
};
pub use elicitation::{
    approval_profile, elicit, rank_by_marginal, rank_by_values, rank_group, threshold_approve, ApprovalProfile,
    ElicitationMethod, RankingMethod, RankingProfile, VoteProfile,
};
pub use error::{Error, Result};
pub use experiment::{evaluate, generate, sweep, EvalConfig, EvalMode, EvaluationReport, GeneratorSpec};
pub use file::InstanceFile;
pub use instance::{social_welfare, validate_instance, AlternativeId, Instance, Rational, RawInstance};
pub use optimize::{knapsack_exact, knapsack_fptas, optimal_welfare, KnapsackProblem, KnapsackSolver, OptimalBundle};
pub use partition::{build_partition, harmonic_scores, shortlist, GroupPartition, HarmonicScoreTable};
pub use utility::{Family, FamilyKind, UtilityOracle};
