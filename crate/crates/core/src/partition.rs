//! Dyadic cost groups and harmonic scoring.
//!
//! Group `G_0` holds alternatives costing at most `1/m`; for `t >= 1`, group
//! `G_t` holds costs in `(2^(t-1)/m, 2^t/m]`. The top index is
//! `T = ceil(log2 m)`, so every cost in `(0, 1]` lands in exactly one group.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::elicitation::RankingProfile;
use crate::error::{Error, Result};
use crate::instance::{rational_to_f64, AlternativeId, Instance, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPartition {
    m: usize,
    top: usize,
    groups: Vec<Vec<AlternativeId>>,
}

/// `ceil(log2 m)`, zero for `m = 1`.
pub fn top_index(m: usize) -> usize {
    assert!(m >= 1);
    m.next_power_of_two().trailing_zeros() as usize
}

/// `l_t`: `0` for `t = 0`, else `2^(t-1)/m`.
pub fn lower_bound(m: usize, t: usize) -> Rational {
    if t == 0 {
        Rational::zero()
    } else {
        Rational::new(1i64 << (t - 1), m as i64)
    }
}

/// `u_t = 2^t/m`.
pub fn upper_bound(m: usize, t: usize) -> Rational {
    Rational::new(1i64 << t, m as i64)
}

pub fn build_partition(instance: &Instance) -> GroupPartition {
    let m = instance.m();
    let top = top_index(m);
    let mut groups = vec![Vec::new(); top + 1];
    for a in instance.alternatives() {
        let cost = instance.cost(a);
        let t = (0..=top)
            .find(|&t| cost <= upper_bound(m, t))
            .expect("validated costs are at most 1 <= u_T");
        groups[t].push(a);
    }
    GroupPartition { m, top, groups }
}

impl GroupPartition {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `T`.
    pub fn top(&self) -> usize {
        self.top
    }

    /// `T + 1`.
    pub fn num_groups(&self) -> usize {
        self.top + 1
    }

    pub fn group(&self, t: usize) -> &[AlternativeId] {
        &self.groups[t]
    }

    pub fn groups(&self) -> &[Vec<AlternativeId>] {
        &self.groups
    }

    pub fn group_of(&self, a: AlternativeId) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(&a))
            .expect("partition covers every alternative")
    }

    pub fn lower(&self, t: usize) -> Rational {
        lower_bound(self.m, t)
    }

    pub fn upper(&self, t: usize) -> Rational {
        upper_bound(self.m, t)
    }

    /// Number of approval thresholds: `T`, or one when `m = 1`.
    pub fn threshold_levels(&self) -> usize {
        self.top.max(1)
    }

    /// The approval thresholds `l_1, ..., l_T` (just `l_1 = 1` when `m = 1`).
    pub fn thresholds(&self) -> Vec<Rational> {
        (1..=self.threshold_levels()).map(|t| self.lower(t)).collect()
    }

    /// Shortlist size `max(1, floor(sqrt(m) / u_t))`.
    ///
    /// `sqrt(m)/u_t = sqrt(m^3) / 2^t`, so the floor is exact in integers.
    pub fn shortlist_cap(&self, t: usize) -> usize {
        let m = self.m as u128;
        let root = (m * m * m).isqrt();
        ((root >> t) as usize).max(1)
    }

    /// Rule A subset size `max(1, floor(1/u_t))` before capping at `|G+_t|`.
    pub fn rule_a_size(&self, t: usize) -> usize {
        (self.m >> t).max(1)
    }

    /// Guaranteed per-group inclusion rate of a shortlisted alternative under
    /// Rule A: `min(1/sqrt(m), min_t k_t / cap_t)`.
    ///
    /// For `m` a power of two this is exactly `1/sqrt(m)`; otherwise flooring
    /// `1/u_t` can push the ratio lower.
    pub fn inclusion_rate(&self) -> f64 {
        let inv_root = 1.0 / (self.m as f64).sqrt();
        (0..=self.top)
            .map(|t| {
                let k = self.rule_a_size(t) as f64;
                let cap = self.shortlist_cap(t) as f64;
                (k / cap).min(1.0)
            })
            .fold(inv_root, f64::min)
    }

    /// Value bin of a stand-alone utility: `I_0 = [0, 1/m]`, `I_t = (l_t, u_t]`,
    /// for `t` up to `levels`.
    pub fn value_bin(&self, value: f64, levels: usize) -> usize {
        (0..levels)
            .find(|&t| value <= rational_to_f64(&self.upper(t)))
            .unwrap_or(levels)
    }
}

/// Harmonic scores `sc(a) = sum_i 1 / rho_i(a)` over one ranked group.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicScoreTable {
    exact: BTreeMap<AlternativeId, BigRational>,
}

impl HarmonicScoreTable {
    pub fn score(&self, a: AlternativeId) -> Option<f64> {
        self.exact.get(&a).map(big_to_f64)
    }

    /// Exact score, used for ordering.
    pub fn exact_score(&self, a: AlternativeId) -> Option<&BigRational> {
        self.exact.get(&a)
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    /// `(alternative, score)` in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (AlternativeId, f64)> + '_ {
        self.exact.iter().map(|(&a, s)| (a, big_to_f64(s)))
    }

    pub fn total(&self) -> f64 {
        big_to_f64(&self.exact.values().fold(BigRational::zero(), |acc, s| acc + s))
    }

    /// Alternatives by descending score, ties by ascending id.
    pub fn ordered(&self) -> Vec<AlternativeId> {
        let mut ids: Vec<AlternativeId> = self.exact.keys().copied().collect();
        ids.sort_by(|a, b| self.exact[b].cmp(&self.exact[a]).then(a.cmp(b)));
        ids
    }
}

fn big_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn harmonic_scores(profile: &RankingProfile) -> Result<HarmonicScoreTable> {
    let group = profile.group();
    for (i, ranking) in profile.rankings().iter().enumerate() {
        let mut sorted = ranking.clone();
        sorted.sort_unstable();
        if sorted != group {
            return Err(Error::MismatchedGroup(format!(
                "voter {i} ranks {ranking:?}, expected a permutation of {group:?}"
            )));
        }
    }
    let mut exact: BTreeMap<AlternativeId, BigRational> = group.iter().map(|&a| (a, BigRational::zero())).collect();
    for ranking in profile.rankings() {
        for (pos, a) in ranking.iter().enumerate() {
            let term = BigRational::new(BigInt::from(1), BigInt::from(pos + 1));
            *exact.get_mut(a).expect("membership checked") += term;
        }
    }
    Ok(HarmonicScoreTable { exact })
}

/// Splits `G_t` into the top-scored `G+_t` and the rest `G-_t`.
pub fn shortlist(
    partition: &GroupPartition,
    scores: &HarmonicScoreTable,
    t: usize,
) -> (Vec<AlternativeId>, Vec<AlternativeId>) {
    let ordered = scores.ordered();
    let cap = partition.shortlist_cap(t).min(ordered.len());
    let mut plus = ordered[..cap].to_vec();
    let mut minus = ordered[cap..].to_vec();
    plus.sort_unstable();
    minus.sort_unstable();
    (plus, minus)
}
