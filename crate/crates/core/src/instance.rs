//! Problem instances: alternatives with exact rational costs, a unit budget,
//! and one normalized utility oracle per voter.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::utility::{Family, UtilityOracle};

/// Dense alternative index in `0..m`.
pub type AlternativeId = usize;

/// Exact cost arithmetic.
pub type Rational = num_rational::Ratio<i64>;

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational of the form num/den"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
        None => s.parse::<i64>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// Always `"num/den"`, reduced, with a positive denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Unvalidated instance as read from a file or produced by a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub costs: Vec<Rational>,
    pub voters: Vec<Family>,
}

/// A validated instance. Costs lie in `(0, 1]` and every oracle satisfies
/// `f(A) = 1`.
#[derive(Debug, Clone)]
pub struct Instance {
    costs: Vec<Rational>,
    // Costs rescaled to integers over a common denominator; the budget is
    // `budget_units`.
    scaled_costs: Vec<u128>,
    budget_units: u128,
    voters: Vec<UtilityOracle>,
}

fn checked_lcm(a: u128, b: u128) -> Option<u128> {
    (a / a.gcd(&b)).checked_mul(b)
}

/// Establishes every instance invariant and normalizes the utilities.
pub fn validate_instance(raw: RawInstance) -> Result<Instance> {
    let m = raw.costs.len();
    if m == 0 {
        return Err(Error::NoAlternatives);
    }
    if raw.voters.is_empty() {
        return Err(Error::NoVoters);
    }
    for (id, cost) in raw.costs.iter().enumerate() {
        if !cost.is_positive() {
            return Err(Error::NonPositiveCost {
                id,
                cost: format_rational(cost),
            });
        }
        if *cost > Rational::one() {
            return Err(Error::CostExceedsBudget {
                id,
                cost: format_rational(cost),
            });
        }
    }
    let mut denom: u128 = 1;
    for cost in &raw.costs {
        denom = checked_lcm(denom, *cost.denom() as u128).ok_or(Error::CostScaleOverflow)?;
    }
    let scaled_costs = raw
        .costs
        .iter()
        .map(|c| (*c.numer() as u128) * (denom / *c.denom() as u128))
        .collect();

    let voters = raw
        .voters
        .into_iter()
        .enumerate()
        .map(|(i, family)| {
            if family.arity() != m {
                return Err(Error::InvalidOracle {
                    voter: i,
                    reason: format!("describes {} alternatives, instance has {m}", family.arity()),
                });
            }
            UtilityOracle::new(family, i)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Instance {
        costs: raw.costs,
        scaled_costs,
        budget_units: denom,
        voters,
    })
}

impl Instance {
    pub fn m(&self) -> usize {
        self.costs.len()
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn alternatives(&self) -> std::ops::Range<AlternativeId> {
        0..self.m()
    }

    pub fn cost(&self, a: AlternativeId) -> Rational {
        self.costs[a]
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn voters(&self) -> &[UtilityOracle] {
        &self.voters
    }

    /// Cost of `a` in integer units of the common denominator.
    pub fn scaled_cost(&self, a: AlternativeId) -> u128 {
        self.scaled_costs[a]
    }

    pub fn budget_units(&self) -> u128 {
        self.budget_units
    }

    /// Exact `c(S)`.
    pub fn total_cost(&self, set: &[AlternativeId]) -> Rational {
        set.iter().fold(Rational::zero(), |acc, &a| acc + self.costs[a])
    }

    /// `c(S) <= 1`, decided on integers.
    pub fn is_feasible(&self, set: &[AlternativeId]) -> bool {
        let mut total: u128 = 0;
        for &a in set {
            total = total.saturating_add(self.scaled_costs[a]);
            if total > self.budget_units {
                return false;
            }
        }
        true
    }

    /// Maximum curvature over the voters.
    pub fn max_curvature(&self) -> f64 {
        self.voters.iter().map(UtilityOracle::curvature).fold(0.0, f64::max)
    }

    /// Back to the unvalidated form (raw oracle parameters).
    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            costs: self.costs.clone(),
            voters: self.voters.iter().map(|v| v.family().clone()).collect(),
        }
    }
}

/// `sw(S) = sum_i f_i(S)`.
pub fn social_welfare(instance: &Instance, set: &[AlternativeId]) -> f64 {
    instance.voters.iter().map(|f| f.eval(set)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn two_voters() -> Instance {
        validate_instance(RawInstance {
            costs: vec![r(3, 5), r(3, 5)],
            voters: vec![
                Family::Additive {
                    values: vec![0.75, 0.25],
                },
                Family::Additive {
                    values: vec![0.25, 0.75],
                },
            ],
        })
        .unwrap()
    }

    #[test]
    fn rejects_cost_above_budget() {
        let err = validate_instance(RawInstance {
            costs: vec![r(1, 2), r(3, 2)],
            voters: vec![Family::Additive { values: vec![1.0, 1.0] }],
        })
        .unwrap_err();
        assert!(matches!(err, Error::CostExceedsBudget { id: 1, .. }));
    }

    #[test]
    fn rejects_zero_cost_and_empty() {
        let zero = validate_instance(RawInstance {
            costs: vec![r(0, 1)],
            voters: vec![Family::Additive { values: vec![1.0] }],
        });
        assert!(matches!(zero, Err(Error::NonPositiveCost { id: 0, .. })));
        let empty = validate_instance(RawInstance {
            costs: vec![],
            voters: vec![Family::Additive { values: vec![] }],
        });
        assert_eq!(empty.unwrap_err(), Error::NoAlternatives);
        let no_voters = validate_instance(RawInstance {
            costs: vec![r(1, 2)],
            voters: vec![],
        });
        assert_eq!(no_voters.unwrap_err(), Error::NoVoters);
    }

    #[test]
    fn rejects_unnormalizable_voter() {
        let err = validate_instance(RawInstance {
            costs: vec![r(1, 2), r(1, 2)],
            voters: vec![
                Family::Additive { values: vec![1.0, 0.0] },
                Family::Additive { values: vec![0.0, 0.0] },
            ],
        })
        .unwrap_err();
        assert_eq!(err, Error::UnnormalizableUtility { voter: 1 });
    }

    #[test]
    fn rejects_arity_mismatch() {
        let err = validate_instance(RawInstance {
            costs: vec![r(1, 2), r(1, 2)],
            voters: vec![Family::Additive { values: vec![1.0] }],
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidOracle { voter: 0, .. }));
    }

    #[test]
    fn exact_feasibility() {
        let inst = validate_instance(RawInstance {
            costs: vec![r(1, 3), r(1, 3), r(1, 3), r(1, 7)],
            voters: vec![Family::Additive { values: vec![1.0; 4] }],
        })
        .unwrap();
        assert!(inst.is_feasible(&[0, 1, 2]));
        assert_eq!(inst.total_cost(&[0, 1, 2]), r(1, 1));
        assert!(!inst.is_feasible(&[0, 1, 2, 3]));
        assert_eq!(inst.budget_units(), 21);
    }

    #[test]
    fn welfare_examples() {
        let inst = two_voters();
        assert_eq!(social_welfare(&inst, &[]), 0.0);
        assert_eq!(social_welfare(&inst, &[0, 1]), 2.0);
        assert_eq!(social_welfare(&inst, &[0]), 1.0);
    }

    #[test]
    fn rational_text() {
        assert_eq!(parse_rational("2/4").unwrap(), r(1, 2));
        assert_eq!(parse_rational(" 1 ").unwrap(), r(1, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert_eq!(format_rational(&r(1, 1)), "1/1");
    }
}
