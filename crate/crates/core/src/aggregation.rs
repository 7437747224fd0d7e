//! Randomized aggregation rules, each materialized as an explicit
//! distribution over feasible sets.
//!
//! Ranking profiles use a mixture of Rule A (a uniform `k_t`-subset of the
//! harmonic-score shortlist) and Rule B (a uniform singleton). Approval
//! profiles use a mixture of a knapsack on approval counts and Rule B.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::elicitation::{approval_profile, rank_group, ApprovalProfile, RankingMethod, RankingProfile};
use crate::error::{Error, Result};
use crate::instance::{social_welfare, AlternativeId, Instance};
use crate::optimize::{KnapsackProblem, KnapsackSolver};
use crate::partition::{harmonic_scores, shortlist, GroupPartition};

/// Largest support a distribution may enumerate.
pub const EXACT_SUPPORT_LIMIT: u128 = 1_000_000;

/// Default probability of running Rule A.
pub const DEFAULT_MIX: f64 = 0.5;

/// A finite distribution over sets of alternatives. Sets are stored sorted
/// and merged, and the support is kept in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDistribution {
    support: Vec<(Vec<AlternativeId>, f64)>,
}

impl SelectionDistribution {
    /// Merges repeated sets and drops zero-probability entries.
    pub fn from_weighted<I>(items: I) -> Self
    where
        I: IntoIterator<Item = (Vec<AlternativeId>, f64)>,
    {
        let mut merged: BTreeMap<Vec<AlternativeId>, f64> = BTreeMap::new();
        for (mut set, p) in items {
            if p <= 0.0 {
                continue;
            }
            set.sort_unstable();
            set.dedup();
            *merged.entry(set).or_insert(0.0) += p;
        }
        SelectionDistribution {
            support: merged.into_iter().collect(),
        }
    }

    pub fn point_mass(set: Vec<AlternativeId>) -> Self {
        Self::from_weighted([(set, 1.0)])
    }

    /// `sum_k weight_k * dist_k`.
    pub fn mixture<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a SelectionDistribution)>,
    {
        Self::from_weighted(
            parts
                .into_iter()
                .flat_map(|(w, d)| d.support.iter().map(move |(s, p)| (s.clone(), w * p))),
        )
    }

    pub fn support(&self) -> &[(Vec<AlternativeId>, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability(&self, set: &[AlternativeId]) -> f64 {
        self.support.iter().find(|(s, _)| s == set).map_or(0.0, |(_, p)| *p)
    }

    pub fn total_probability(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }

    /// `P(a selected)` for every `a` in `0..m`.
    pub fn inclusion_probs(&self, m: usize) -> Vec<f64> {
        let mut probs = vec![0.0; m];
        for (set, p) in &self.support {
            for &a in set {
                probs[a] += p;
            }
        }
        probs
    }

    /// Union of all support sets.
    pub fn union(&self) -> Vec<AlternativeId> {
        let mut all: Vec<AlternativeId> = self.support.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Every support set is feasible and the mass is one (within `1e-12`).
    pub fn is_valid_for(&self, instance: &Instance) -> bool {
        (self.total_probability() - 1.0).abs() <= 1e-12 && self.support.iter().all(|(s, _)| instance.is_feasible(s))
    }
}

fn check_mix(mix: f64) -> Result<()> {
    if (0.0..=1.0).contains(&mix) {
        Ok(())
    } else {
        Err(Error::InvalidMix(mix))
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The Rule A shortlist `G+_t` and subset size `k_t` for one ranked group.
pub fn rule_a_plan(profile: &RankingProfile, partition: &GroupPartition) -> Result<(Vec<AlternativeId>, usize)> {
    let t = profile.group_index();
    let scores = harmonic_scores(profile)?;
    let (plus, _) = shortlist(partition, &scores, t);
    let k = partition.rule_a_size(t).min(plus.len());
    Ok((plus, k))
}

/// Rule A: a uniformly random `k_t`-subset of the shortlist `G+_t`, where
/// `k_t = min(|G+_t|, max(1, floor(1/u_t)))`.
pub fn rule_a_ranking(
    profile: &RankingProfile,
    partition: &GroupPartition,
    instance: &Instance,
) -> Result<SelectionDistribution> {
    let (plus, k) = rule_a_plan(profile, partition)?;
    if plus.is_empty() {
        return Ok(SelectionDistribution::point_mass(Vec::new()));
    }
    let count = binomial(plus.len(), k);
    if count > EXACT_SUPPORT_LIMIT {
        return Err(Error::ExceedsExactBudget {
            what: "Rule A subsets",
            needed: count,
            budget: EXACT_SUPPORT_LIMIT,
        });
    }
    let p = 1.0 / count as f64;
    let dist = SelectionDistribution::from_weighted(plus.into_iter().combinations(k).map(|s| (s, p)));
    debug_assert!(dist.support.iter().all(|(s, _)| instance.is_feasible(s)));
    Ok(dist)
}

/// Rule B: one alternative uniformly at random.
pub fn rule_b_uniform(instance: &Instance) -> SelectionDistribution {
    let p = 1.0 / instance.m() as f64;
    SelectionDistribution::from_weighted(instance.alternatives().map(|a| (vec![a], p)))
}

/// `mix * RuleA + (1 - mix) * RuleB` for one ranking profile.
pub fn aggregate_ranking(
    profile: &RankingProfile,
    partition: &GroupPartition,
    instance: &Instance,
    mix: f64,
) -> Result<SelectionDistribution> {
    check_mix(mix)?;
    let rule_a = if mix > 0.0 {
        rule_a_ranking(profile, partition, instance)?
    } else {
        SelectionDistribution::point_mass(Vec::new())
    };
    let rule_b = rule_b_uniform(instance);
    Ok(SelectionDistribution::mixture([(mix, &rule_a), (1.0 - mix, &rule_b)]))
}

/// The whole ranking pipeline: a uniform group draw, then
/// [`aggregate_ranking`] on that group's profile.
pub fn aggregate_ranking_all_groups(
    instance: &Instance,
    partition: &GroupPartition,
    method: RankingMethod,
    mix: f64,
) -> Result<SelectionDistribution> {
    check_mix(mix)?;
    let weight = 1.0 / partition.num_groups() as f64;
    let per_group = (0..partition.num_groups())
        .map(|t| aggregate_ranking(&rank_group(instance, partition, method, t), partition, instance, mix))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionDistribution::mixture(per_group.iter().map(|d| (weight, d))))
}

/// Rule A for approvals: solve `max sum w_a` subject to `c(S) <= 1`.
pub fn rule_a_threshold(
    profile: &ApprovalProfile,
    instance: &Instance,
    solver: KnapsackSolver,
) -> Result<Vec<AlternativeId>> {
    let problem = KnapsackProblem::for_instance(instance, profile.weights().to_vec());
    solver.solve(&problem)
}

/// `V(alpha)` for each threshold, in threshold order.
pub fn threshold_outcomes(
    instance: &Instance,
    partition: &GroupPartition,
    solver: KnapsackSolver,
) -> Result<Vec<Vec<AlternativeId>>> {
    partition
        .thresholds()
        .into_iter()
        .map(|alpha| rule_a_threshold(&approval_profile(instance, partition, alpha), instance, solver))
        .collect()
}

/// Each `V(alpha)` at `mix / T` plus singletons at `(1 - mix) / m`.
pub fn aggregate_threshold(
    instance: &Instance,
    partition: &GroupPartition,
    mix: f64,
    solver: KnapsackSolver,
) -> Result<SelectionDistribution> {
    check_mix(mix)?;
    let outcomes = threshold_outcomes(instance, partition, solver)?;
    let per_threshold = 1.0 / outcomes.len() as f64;
    let rule_a = SelectionDistribution::from_weighted(outcomes.into_iter().map(|s| (s, per_threshold)));
    let rule_b = rule_b_uniform(instance);
    Ok(SelectionDistribution::mixture([(mix, &rule_a), (1.0 - mix, &rule_b)]))
}

/// `sum_{(S, p)} p * sw(S)`.
pub fn expected_welfare(dist: &SelectionDistribution, instance: &Instance) -> f64 {
    dist.support.iter().map(|(s, p)| p * social_welfare(instance, s)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elicitation::{RankingMethod, RankingProfile};
    use crate::instance::{validate_instance, Rational, RawInstance};
    use crate::partition::build_partition;
    use crate::utility::Family;

    fn instance(costs: &[(i64, i64)], voters: Vec<Family>) -> Instance {
        validate_instance(RawInstance {
            costs: costs.iter().map(|&(n, d)| Rational::new(n, d)).collect(),
            voters,
        })
        .unwrap()
    }

    fn flat(m: usize) -> Vec<Family> {
        vec![Family::Additive { values: vec![1.0; m] }]
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
    }

    #[test]
    fn rule_a_caps_k_at_shortlist() {
        let inst = instance(&[(1, 8), (1, 5), (1, 2), (1, 1)], flat(4));
        let p = build_partition(&inst);
        let prof = RankingProfile::new(RankingMethod::MarginalValues, 0, vec![vec![1, 0]]);
        let d = rule_a_ranking(&prof, &p, &inst).unwrap();
        assert_eq!(d.support(), &[(vec![0, 1], 1.0)]);
    }

    #[test]
    fn rule_a_single_top_item() {
        let inst = instance(&[(1, 8), (1, 5), (1, 2), (1, 1)], flat(4));
        let p = build_partition(&inst);
        let prof = RankingProfile::new(RankingMethod::MarginalValues, 2, vec![vec![3]]);
        assert_eq!(rule_a_ranking(&prof, &p, &inst).unwrap().support(), &[(vec![3], 1.0)]);
    }

    #[test]
    fn rule_a_uniform_pairs() {
        // three alternatives in G_1 of m = 4 (k = 2, cap = 4)
        let inst = instance(&[(1, 8), (1, 3), (1, 3), (1, 3)], flat(4));
        let p = build_partition(&inst);
        assert_eq!(p.group(1), &[1, 2, 3]);
        let prof = RankingProfile::new(RankingMethod::StandaloneValues, 1, vec![vec![2, 1, 3]]);
        let d = rule_a_ranking(&prof, &p, &inst).unwrap();
        assert_eq!(d.len(), 3);
        for (set, prob) in d.support() {
            assert_eq!(set.len(), 2);
            assert!((prob - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(d.is_valid_for(&inst));
    }

    #[test]
    fn rule_a_empty_group() {
        let inst = instance(&[(1, 4); 4], flat(4));
        let p = build_partition(&inst);
        let prof = rank_group(&inst, &p, RankingMethod::MarginalValues, 1);
        let d = rule_a_ranking(&prof, &p, &inst).unwrap();
        assert_eq!(d.support(), &[(vec![], 1.0)]);
        assert_eq!(expected_welfare(&d, &inst), 0.0);
    }

    #[test]
    fn rule_b() {
        let one = instance(&[(1, 1)], flat(1));
        assert_eq!(rule_b_uniform(&one).support(), &[(vec![0], 1.0)]);
        let four = instance(&[(1, 2); 4], flat(4));
        let d = rule_b_uniform(&four);
        assert_eq!(d.len(), 4);
        assert_eq!(d.inclusion_probs(4), vec![0.25; 4]);
    }

    #[test]
    fn mixtures() {
        let inst = instance(&[(1, 8), (1, 5), (1, 2), (1, 1)], flat(4));
        let p = build_partition(&inst);
        let prof = RankingProfile::new(RankingMethod::MarginalValues, 2, vec![vec![3]]);
        let rule_a = rule_a_ranking(&prof, &p, &inst).unwrap();
        assert_eq!(aggregate_ranking(&prof, &p, &inst, 1.0).unwrap(), rule_a);
        assert_eq!(aggregate_ranking(&prof, &p, &inst, 0.0).unwrap(), rule_b_uniform(&inst));
        let half = aggregate_ranking(&prof, &p, &inst, 0.5).unwrap();
        assert_eq!(half.probability(&[3]), 0.5 + 0.125);
        for a in 0..3 {
            assert_eq!(half.probability(&[a]), 0.125);
        }
        assert!(aggregate_ranking(&prof, &p, &inst, 1.5).is_err());
    }

    #[test]
    fn threshold_two_alternatives() {
        let inst = instance(
            &[(3, 5), (3, 5)],
            vec![
                Family::Additive {
                    values: vec![0.75, 0.25],
                },
                Family::Additive {
                    values: vec![0.75, 0.25],
                },
            ],
        );
        let p = build_partition(&inst);
        assert_eq!(p.thresholds(), vec![Rational::new(1, 2)]);
        for mix in [0.0, 0.3, 0.5, 1.0] {
            let d = aggregate_threshold(&inst, &p, mix, KnapsackSolver::ExactDp).unwrap();
            assert!((d.probability(&[0]) - (mix + (1.0 - mix) / 2.0)).abs() < 1e-15);
            assert!((d.probability(&[1]) - (1.0 - mix) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_mix_zero_is_uniform() {
        let inst = instance(&[(1, 8), (1, 5), (1, 2), (1, 1)], flat(4));
        let p = build_partition(&inst);
        let d = aggregate_threshold(&inst, &p, 0.0, KnapsackSolver::ExactDp).unwrap();
        assert_eq!(d, rule_b_uniform(&inst));
    }

    #[test]
    fn expected_welfare_examples() {
        let inst = instance(
            &[(3, 5), (3, 5)],
            vec![
                Family::Additive {
                    values: vec![0.75, 0.25],
                },
                Family::Additive {
                    values: vec![0.25, 0.75],
                },
            ],
        );
        assert_eq!(expected_welfare(&SelectionDistribution::point_mass(vec![]), &inst), 0.0);
        assert_eq!(
            expected_welfare(&SelectionDistribution::point_mass(vec![0, 1]), &inst),
            2.0
        );
        let d = SelectionDistribution::from_weighted([(vec![0], 0.5), (vec![1], 0.5)]);
        assert_eq!(expected_welfare(&d, &inst), 1.0);
    }
}
