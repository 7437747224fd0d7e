//! Voter utility oracles.
//!
//! Every oracle is a monotone submodular set function over the alternatives,
//! scaled so that the full set has utility exactly one. Four parametric
//! families are supported; the raw parameters are kept alongside a `norm`
//! factor equal to `1 / raw(A)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::AlternativeId;

/// Floating-point noise allowed below zero before a marginal is clamped.
pub const MARGINAL_CLAMP: f64 = 1e-12;

/// Raw (unnormalized) parameters of a utility function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// `f(S) = sum of values[a] for a in S`.
    Additive { values: Vec<f64> },
    /// Weighted coverage: alternative `a` covers the universe elements
    /// `covers[a]`; `f(S)` is the total weight of the covered union.
    Coverage { weights: Vec<f64>, covers: Vec<Vec<usize>> },
    /// `f(S) = (sum of values[a] for a in S)^gamma` with `0 < gamma <= 1`.
    ConcaveOverModular { values: Vec<f64>, gamma: f64 },
    /// `f(S) = max of values[a] for a in S`.
    MaxValue { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Additive,
    Coverage,
    ConcaveOverModular,
    MaxValue,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::Additive,
        FamilyKind::Coverage,
        FamilyKind::ConcaveOverModular,
        FamilyKind::MaxValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Additive => "additive",
            FamilyKind::Coverage => "coverage",
            FamilyKind::ConcaveOverModular => "concave",
            FamilyKind::MaxValue => "max-value",
        }
    }
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(FamilyKind::Additive),
            "coverage" => Ok(FamilyKind::Coverage),
            "concave" | "concave-over-modular" => Ok(FamilyKind::ConcaveOverModular),
            "max-value" | "max" => Ok(FamilyKind::MaxValue),
            other => Err(Error::Parse(format!("unknown utility family `{other}`"))),
        }
    }
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Additive { .. } => FamilyKind::Additive,
            Family::Coverage { .. } => FamilyKind::Coverage,
            Family::ConcaveOverModular { .. } => FamilyKind::ConcaveOverModular,
            Family::MaxValue { .. } => FamilyKind::MaxValue,
        }
    }

    /// Number of alternatives the parameters describe.
    pub fn arity(&self) -> usize {
        match self {
            Family::Additive { values } | Family::ConcaveOverModular { values, .. } | Family::MaxValue { values } => {
                values.len()
            }
            Family::Coverage { covers, .. } => covers.len(),
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        let check_values = |values: &[f64]| match values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            Some(a) => Err(format!("value for alternative {a} is negative or not finite")),
            None => Ok(()),
        };
        match self {
            Family::Additive { values } | Family::MaxValue { values } => check_values(values),
            Family::ConcaveOverModular { values, gamma } => {
                if !(*gamma > 0.0 && *gamma <= 1.0) {
                    return Err(format!("gamma {gamma} outside (0, 1]"));
                }
                check_values(values)
            }
            Family::Coverage { weights, covers } => {
                check_values(weights)?;
                for (a, cover) in covers.iter().enumerate() {
                    if let Some(e) = cover.iter().find(|&&e| e >= weights.len()) {
                        return Err(format!(
                            "alternative {a} covers element {e} outside a universe of {}",
                            weights.len()
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

/// A normalized monotone submodular utility function.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityOracle {
    family: Family,
    norm: f64,
    // Coverage only: one bitset per alternative over the universe.
    cover_masks: Vec<Vec<u64>>,
}

impl UtilityOracle {
    /// Builds the oracle and normalizes it so that `f(A) = 1`.
    ///
    /// `voter` is only used to label errors.
    pub fn new(family: Family, voter: usize) -> Result<Self> {
        family
            .check()
            .map_err(|reason| Error::InvalidOracle { voter, reason })?;
        let cover_masks = match &family {
            Family::Coverage { weights, covers } => {
                let words = weights.len().div_ceil(64).max(1);
                covers
                    .iter()
                    .map(|cover| {
                        let mut mask = vec![0u64; words];
                        for &e in cover {
                            mask[e / 64] |= 1 << (e % 64);
                        }
                        mask
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        let mut oracle = UtilityOracle {
            family,
            norm: 1.0,
            cover_masks,
        };
        let all: Vec<AlternativeId> = (0..oracle.arity()).collect();
        let raw_total = oracle.raw_eval(&all);
        if raw_total.is_nan() || raw_total <= 0.0 || !raw_total.is_finite() {
            return Err(Error::UnnormalizableUtility { voter });
        }
        oracle.norm = 1.0 / raw_total;
        Ok(oracle)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    /// Scale factor applied to the raw function.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn arity(&self) -> usize {
        self.family.arity()
    }

    fn raw_eval(&self, set: &[AlternativeId]) -> f64 {
        match &self.family {
            Family::Additive { values } => set.iter().map(|&a| values[a]).sum(),
            Family::ConcaveOverModular { values, gamma } => {
                let total: f64 = set.iter().map(|&a| values[a]).sum();
                total.powf(*gamma)
            }
            Family::MaxValue { values } => set.iter().map(|&a| values[a]).fold(0.0, f64::max),
            Family::Coverage { weights, .. } => {
                let words = weights.len().div_ceil(64).max(1);
                let mut union = vec![0u64; words];
                for &a in set {
                    for (u, m) in union.iter_mut().zip(&self.cover_masks[a]) {
                        *u |= m;
                    }
                }
                let mut total = 0.0;
                for (w, word) in union.iter().enumerate() {
                    let mut bits = *word;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        total += weights[w * 64 + b];
                        bits &= bits - 1;
                    }
                }
                total
            }
        }
    }

    /// `f(S)`. Duplicated ids count once for every family except additive and
    /// concave-over-modular, so callers pass proper sets.
    ///
    /// Panics if `set` holds an id outside `0..arity`.
    pub fn eval(&self, set: &[AlternativeId]) -> f64 {
        self.norm * self.raw_eval(set)
    }

    /// `f({a})`.
    pub fn standalone(&self, a: AlternativeId) -> f64 {
        self.eval(&[a])
    }

    /// Marginal gain `f(S + a) - f(S)`, with float noise below zero clamped.
    pub fn marginal(&self, a: AlternativeId, set: &[AlternativeId]) -> Result<f64> {
        if a >= self.arity() {
            return Err(Error::UnknownAlternative(a));
        }
        if let Some(&bad) = set.iter().find(|&&b| b >= self.arity()) {
            return Err(Error::UnknownAlternative(bad));
        }
        if set.contains(&a) {
            return Err(Error::AlreadyInSet(a));
        }
        let mut extended = Vec::with_capacity(set.len() + 1);
        extended.extend_from_slice(set);
        extended.push(a);
        Ok(clamp_marginal(self.eval(&extended) - self.eval(set)))
    }

    /// Least `c` in `[0, 1]` with `f(a | S) >= (1 - c) f({a})` for all `S`, `a`.
    ///
    /// For a monotone submodular function the binding set is `A - {a}`, so one
    /// marginal per alternative suffices.
    pub fn curvature(&self) -> f64 {
        if matches!(self.family, Family::Additive { .. }) {
            return 0.0;
        }
        let m = self.arity();
        let all: Vec<AlternativeId> = (0..m).collect();
        let full = self.eval(&all);
        let mut min_ratio = 1.0f64;
        for a in 0..m {
            let single = self.standalone(a);
            if single <= 0.0 {
                continue;
            }
            let rest: Vec<AlternativeId> = all.iter().copied().filter(|&b| b != a).collect();
            let last_gain = clamp_marginal(full - self.eval(&rest));
            min_ratio = min_ratio.min(last_gain / single);
        }
        (1.0 - min_ratio).clamp(0.0, 1.0)
    }
}

pub(crate) fn clamp_marginal(delta: f64) -> f64 {
    if delta < 0.0 && delta > -MARGINAL_CLAMP {
        0.0
    } else {
        delta
    }
}
