//! Vote elicitation: group rankings by greedy marginal value or by stand-alone
//! value, and threshold approval sets.

use rand::Rng;

use crate::instance::{rational_to_f64, AlternativeId, Instance, Rational};
use crate::partition::GroupPartition;
use crate::utility::UtilityOracle;

/// Utilities within this distance below a threshold still approve.
pub const APPROVAL_TOLERANCE: f64 = 1e-12;

// Greedy picks treat gains within this distance as tied.
const GAIN_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RankingMethod {
    MarginalValues,
    StandaloneValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElicitationMethod {
    MarginalValues,
    StandaloneValues,
    ThresholdApproval,
}

impl ElicitationMethod {
    pub const ALL: [ElicitationMethod; 3] = [
        ElicitationMethod::MarginalValues,
        ElicitationMethod::StandaloneValues,
        ElicitationMethod::ThresholdApproval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElicitationMethod::MarginalValues => "marginal-rank",
            ElicitationMethod::StandaloneValues => "value-rank",
            ElicitationMethod::ThresholdApproval => "threshold",
        }
    }

    pub fn ranking(self) -> Option<RankingMethod> {
        match self {
            ElicitationMethod::MarginalValues => Some(RankingMethod::MarginalValues),
            ElicitationMethod::StandaloneValues => Some(RankingMethod::StandaloneValues),
            ElicitationMethod::ThresholdApproval => None,
        }
    }
}

impl std::fmt::Display for ElicitationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ElicitationMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "marginal-rank" => Ok(ElicitationMethod::MarginalValues),
            "value-rank" => Ok(ElicitationMethod::StandaloneValues),
            "threshold" => Ok(ElicitationMethod::ThresholdApproval),
            other => Err(crate::Error::Parse(format!(
                "unknown method `{other}` (expected marginal-rank, value-rank or threshold)"
            ))),
        }
    }
}

/// Every voter's ranking of one cost group.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingProfile {
    method: RankingMethod,
    group_index: usize,
    group: Vec<AlternativeId>,
    rankings: Vec<Vec<AlternativeId>>,
}

impl RankingProfile {
    /// Membership is not checked here; `harmonic_scores` rejects rankings
    /// that are not permutations of a common group.
    pub fn new(method: RankingMethod, group_index: usize, rankings: Vec<Vec<AlternativeId>>) -> Self {
        let mut group = rankings.first().cloned().unwrap_or_default();
        group.sort_unstable();
        group.dedup();
        RankingProfile {
            method,
            group_index,
            group,
            rankings,
        }
    }

    pub fn method(&self) -> RankingMethod {
        self.method
    }

    pub fn group_index(&self) -> usize {
        self.group_index
    }

    /// The ranked group in ascending id order.
    pub fn group(&self) -> Vec<AlternativeId> {
        self.group.clone()
    }

    pub fn rankings(&self) -> &[Vec<AlternativeId>] {
        &self.rankings
    }

    pub fn is_empty(&self) -> bool {
        self.group.is_empty()
    }

    /// 1-indexed position `rho_i(a)`.
    pub fn position(&self, voter: usize, a: AlternativeId) -> Option<usize> {
        self.rankings[voter].iter().position(|&b| b == a).map(|p| p + 1)
    }
}

/// Approval sets at one threshold, with the derived weights and the
/// stand-alone value histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct ApprovalProfile {
    threshold: Rational,
    approvals: Vec<Vec<AlternativeId>>,
    weights: Vec<u64>,
    histogram: Vec<Vec<u64>>,
}

impl ApprovalProfile {
    pub fn threshold(&self) -> Rational {
        self.threshold
    }

    pub fn approvals(&self) -> &[Vec<AlternativeId>] {
        &self.approvals
    }

    /// `w_a`: number of voters approving `a`.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// `d_a^t` for `t = 0..=T`, indexed `[a][t]`.
    pub fn histogram(&self) -> &[Vec<u64>] {
        &self.histogram
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VoteProfile {
    Ranking(RankingProfile),
    Approval(ApprovalProfile),
}

/// Greedy order: repeatedly take the largest marginal gain, ties by id.
pub fn rank_by_marginal(oracle: &UtilityOracle, group: &[AlternativeId]) -> Vec<AlternativeId> {
    let mut remaining: Vec<AlternativeId> = group.to_vec();
    remaining.sort_unstable();
    let mut chosen: Vec<AlternativeId> = Vec::with_capacity(group.len());
    let mut current = 0.0;
    while !remaining.is_empty() {
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for (idx, &a) in remaining.iter().enumerate() {
            chosen.push(a);
            let gain = oracle.eval(&chosen) - current;
            chosen.pop();
            if gain > best_gain + GAIN_TIE {
                best = idx;
                best_gain = gain;
            }
        }
        let a = remaining.remove(best);
        chosen.push(a);
        current = oracle.eval(&chosen);
    }
    chosen
}

/// Greedy marginal gains along a ranking, `Delta_i(b)` for each position.
pub fn prefix_marginals(oracle: &UtilityOracle, ranking: &[AlternativeId]) -> Vec<f64> {
    let mut prev = 0.0;
    (1..=ranking.len())
        .map(|k| {
            let value = oracle.eval(&ranking[..k]);
            let gain = crate::utility::clamp_marginal(value - prev);
            prev = value;
            gain
        })
        .collect()
}

/// Sort by `f({a})` descending, ties by id.
pub fn rank_by_values(oracle: &UtilityOracle, group: &[AlternativeId]) -> Vec<AlternativeId> {
    let mut keyed: Vec<(f64, AlternativeId)> = group.iter().map(|&a| (oracle.standalone(a), a)).collect();
    keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    keyed.into_iter().map(|(_, a)| a).collect()
}

pub fn threshold_approve(oracle: &UtilityOracle, alpha: Rational) -> Vec<AlternativeId> {
    let alpha = rational_to_f64(&alpha);
    (0..oracle.arity())
        .filter(|&a| oracle.standalone(a) >= alpha - APPROVAL_TOLERANCE)
        .collect()
}

/// All voters rank group `t` with the given method.
pub fn rank_group(instance: &Instance, partition: &GroupPartition, method: RankingMethod, t: usize) -> RankingProfile {
    let group = partition.group(t);
    let rankings = instance
        .voters()
        .iter()
        .map(|f| match method {
            RankingMethod::MarginalValues => rank_by_marginal(f, group),
            RankingMethod::StandaloneValues => rank_by_values(f, group),
        })
        .collect();
    RankingProfile {
        method,
        group_index: t,
        group: group.to_vec(),
        rankings,
    }
}

/// All voters' approvals at `alpha`, with weights and the value histogram.
pub fn approval_profile(instance: &Instance, partition: &GroupPartition, alpha: Rational) -> ApprovalProfile {
    let m = instance.m();
    let levels = partition.threshold_levels();
    let approvals: Vec<Vec<AlternativeId>> = instance.voters().iter().map(|f| threshold_approve(f, alpha)).collect();
    let mut weights = vec![0u64; m];
    for set in &approvals {
        for &a in set {
            weights[a] += 1;
        }
    }
    let mut histogram = vec![vec![0u64; levels + 1]; m];
    for f in instance.voters() {
        for (a, row) in histogram.iter_mut().enumerate() {
            row[partition.value_bin(f.standalone(a), levels)] += 1;
        }
    }
    ApprovalProfile {
        threshold: alpha,
        approvals,
        weights,
        histogram,
    }
}

/// Draws the elicitation randomness (a group or a threshold) and collects
/// the votes. Empty groups are not skipped.
pub fn elicit<R: Rng + ?Sized>(
    instance: &Instance,
    partition: &GroupPartition,
    method: ElicitationMethod,
    rng: &mut R,
) -> VoteProfile {
    match method.ranking() {
        Some(ranking) => {
            let t = rng.gen_range(0..partition.num_groups());
            VoteProfile::Ranking(rank_group(instance, partition, ranking, t))
        }
        None => {
            let thresholds = partition.thresholds();
            let alpha = thresholds[rng.gen_range(0..thresholds.len())];
            VoteProfile::Approval(approval_profile(instance, partition, alpha))
        }
    }
}
