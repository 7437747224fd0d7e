//! 0/1 knapsack solvers over exact costs and the exhaustive welfare optimum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{social_welfare, AlternativeId, Instance};

/// Largest `m` accepted by [`optimal_welfare`].
pub const EXACT_ENUMERATION_LIMIT: usize = 24;

/// Welfare differences at or below this are ties.
const WELFARE_TIE: f64 = 1e-12;

/// Integer profits and integer-scaled costs; a set is feasible when its
/// scaled cost is at most `capacity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackProblem {
    pub profits: Vec<u64>,
    pub costs: Vec<u128>,
    pub capacity: u128,
}

impl KnapsackProblem {
    /// Profits over the instance's alternatives with the unit budget.
    pub fn for_instance(instance: &Instance, profits: Vec<u64>) -> Self {
        assert_eq!(profits.len(), instance.m());
        KnapsackProblem {
            profits,
            costs: instance.alternatives().map(|a| instance.scaled_cost(a)).collect(),
            capacity: instance.budget_units(),
        }
    }

    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    pub fn profit(&self, set: &[AlternativeId]) -> u64 {
        set.iter().map(|&a| self.profits[a]).sum()
    }

    pub fn is_feasible(&self, set: &[AlternativeId]) -> bool {
        set.iter()
            .try_fold(0u128, |acc, &a| acc.checked_add(self.costs[a]))
            .is_some_and(|c| c <= self.capacity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnapsackSolver {
    ExactDp,
    Fptas(f64),
}

impl KnapsackSolver {
    pub fn epsilon(self) -> f64 {
        match self {
            KnapsackSolver::ExactDp => 0.0,
            KnapsackSolver::Fptas(eps) => eps,
        }
    }

    pub fn solve(self, problem: &KnapsackProblem) -> Result<Vec<AlternativeId>> {
        match self {
            KnapsackSolver::ExactDp => Ok(knapsack_exact(problem)),
            KnapsackSolver::Fptas(eps) => knapsack_fptas(problem, eps),
        }
    }
}

impl std::fmt::Display for KnapsackSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KnapsackSolver::ExactDp => f.write_str("dp"),
            KnapsackSolver::Fptas(eps) => write!(f, "fptas:{eps}"),
        }
    }
}

impl std::str::FromStr for KnapsackSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "dp" {
            return Ok(KnapsackSolver::ExactDp);
        }
        let eps = s
            .strip_prefix("fptas:")
            .and_then(|e| e.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("unknown solver `{s}` (expected dp or fptas:EPS)")))?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidEpsilon(eps));
        }
        Ok(KnapsackSolver::Fptas(eps))
    }
}

const UNREACHABLE: u128 = u128::MAX;

/// Maximum-profit feasible set; among optimal sets, the lexicographically
/// smallest ascending id sequence.
///
/// `min_cost[i][q]` is the least cost of reaching profit exactly `q` with
/// items `i..m`. Reconstruction walks ids upward and takes an item whenever
/// the remaining profit can still be completed within budget.
pub fn knapsack_exact(problem: &KnapsackProblem) -> Vec<AlternativeId> {
    let m = problem.len();
    let total: usize = problem.profits.iter().map(|&p| p as usize).sum();
    let mut min_cost = vec![vec![UNREACHABLE; total + 1]; m + 1];
    min_cost[m][0] = 0;
    for i in (0..m).rev() {
        let (head, tail) = min_cost.split_at_mut(i + 1);
        let next = &tail[0];
        let row = &mut head[i];
        let p = problem.profits[i] as usize;
        let c = problem.costs[i];
        for q in 0..=total {
            let skip = next[q];
            let take = if q >= p && next[q - p] != UNREACHABLE {
                next[q - p].saturating_add(c)
            } else {
                UNREACHABLE
            };
            row[q] = skip.min(take);
        }
    }
    let best = (0..=total)
        .rev()
        .find(|&q| min_cost[0][q] <= problem.capacity)
        .unwrap_or(0);

    let mut chosen = Vec::new();
    let mut remaining = best;
    let mut budget = problem.capacity;
    for i in 0..m {
        if remaining == 0 {
            break;
        }
        let p = problem.profits[i] as usize;
        if p > remaining {
            continue;
        }
        let rest = min_cost[i + 1][remaining - p];
        if rest != UNREACHABLE && rest.saturating_add(problem.costs[i]) <= budget {
            chosen.push(i);
            remaining -= p;
            budget -= problem.costs[i];
        }
    }
    chosen
}

/// Profit-scaling approximation: profits are divided by
/// `K = eps * max_profit / m` and rounded down, then solved exactly. The
/// result has profit at least `(1 - eps) * OPT`.
pub fn knapsack_fptas(problem: &KnapsackProblem, eps: f64) -> Result<Vec<AlternativeId>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let max_profit = problem.profits.iter().copied().max().unwrap_or(0);
    if max_profit == 0 {
        return Ok(Vec::new());
    }
    let scale = eps * max_profit as f64 / problem.len() as f64;
    if scale <= 1.0 {
        return Ok(knapsack_exact(problem));
    }
    let scaled = KnapsackProblem {
        profits: problem
            .profits
            .iter()
            .map(|&p| (p as f64 / scale).floor() as u64)
            .collect(),
        costs: problem.costs.clone(),
        capacity: problem.capacity,
    };
    Ok(knapsack_exact(&scaled))
}

/// `S*` and its welfare.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalBundle {
    pub set: Vec<AlternativeId>,
    pub welfare: f64,
}

/// Exhaustive welfare maximization over feasible sets, pruning only on cost.
/// Ties resolve to the lexicographically smallest set.
pub fn optimal_welfare(instance: &Instance) -> Result<OptimalBundle> {
    let m = instance.m();
    if m > EXACT_ENUMERATION_LIMIT {
        return Err(Error::ExceedsExactBudget {
            what: "alternatives for exhaustive S*",
            needed: m as u128,
            budget: EXACT_ENUMERATION_LIMIT as u128,
        });
    }
    // Subtrees rooted at each first element are explored independently and
    // merged in id order, which preserves the lexicographic tie-break.
    let empty = OptimalBundle {
        set: Vec::new(),
        welfare: 0.0,
    };
    let branches: Vec<OptimalBundle> = (0..m)
        .into_par_iter()
        .map(|first| {
            let mut best = OptimalBundle {
                set: vec![first],
                welfare: social_welfare(instance, &[first]),
            };
            let mut stack = vec![first];
            descend(instance, &mut stack, instance.scaled_cost(first), &mut best);
            best
        })
        .collect();
    Ok(branches.into_iter().fold(empty, |best, cand| {
        if cand.welfare > best.welfare + WELFARE_TIE {
            cand
        } else {
            best
        }
    }))
}

fn descend(instance: &Instance, stack: &mut Vec<AlternativeId>, cost: u128, best: &mut OptimalBundle) {
    let last = *stack.last().expect("non-empty prefix");
    for next in last + 1..instance.m() {
        let next_cost = cost + instance.scaled_cost(next);
        if next_cost > instance.budget_units() {
            continue;
        }
        stack.push(next);
        let welfare = social_welfare(instance, stack);
        if welfare > best.welfare + WELFARE_TIE {
            best.set = stack.clone();
            best.welfare = welfare;
        }
        descend(instance, stack, next_cost, best);
        stack.pop();
    }
}
