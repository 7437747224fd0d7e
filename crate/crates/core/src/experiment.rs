//! Instance generators, full-pipeline evaluation and sweeps.
//!
//! The welfare ratio reported here is `sw(S*) / E[sw(rule)]` for the one
//! utility profile that generated the votes. Distortion takes a supremum over
//! every profile consistent with the votes, so the ratio is a per-instance
//! lower bound on distortion, never the distortion itself.

use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregation::{
    aggregate_ranking_all_groups, aggregate_threshold, binomial, expected_welfare, rule_a_plan, threshold_outcomes,
    EXACT_SUPPORT_LIMIT,
};
use crate::elicitation::{rank_group, ElicitationMethod};
use crate::error::{Error, Result};
use crate::instance::{social_welfare, validate_instance, AlternativeId, Instance, Rational, RawInstance};
use crate::optimize::{optimal_welfare, KnapsackSolver};
use crate::partition::{build_partition, top_index, GroupPartition};
use crate::rng::{stream, StreamRng};
use crate::utility::{Family, FamilyKind};

/// Slack allowed when comparing welfare against a proven bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel {
    /// `k / grid` with `k` uniform in `1..=grid`.
    UniformRational {
        grid: u32,
    },
    /// `k / 2^j`: `j` uniform in `0..=max_exponent`, then `k` uniform in
    /// `1..=2^j`. Spreads costs across the dyadic groups. `None` picks
    /// `ceil(log2 m) + 2`.
    Dyadic {
        max_exponent: Option<u32>,
    },
    Fixed(Vec<Rational>),
}

impl std::str::FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = |what: &str| Error::Parse(format!("bad cost model `{s}`: {what}"));
        match name {
            "uniform" => {
                let grid = match arg {
                    Some(g) => g.parse().map_err(|_| bad("grid must be a positive integer"))?,
                    None => 100,
                };
                if grid == 0 {
                    return Err(bad("grid must be a positive integer"));
                }
                Ok(CostModel::UniformRational { grid })
            }
            "dyadic" => {
                let max_exponent = arg
                    .map(|e| e.parse().map_err(|_| bad("exponent must be an integer below 62")))
                    .transpose()?;
                if max_exponent.is_some_and(|e: u32| e >= 62) {
                    return Err(bad("exponent must be an integer below 62"));
                }
                Ok(CostModel::Dyadic { max_exponent })
            }
            "fixed" => {
                let list = arg.ok_or_else(|| bad("expected fixed:c1,c2,..."))?;
                list.split(',')
                    .map(crate::instance::parse_rational)
                    .collect::<Result<Vec<_>>>()
                    .map(CostModel::Fixed)
            }
            _ => Err(bad("expected uniform[:GRID], dyadic[:EXP] or fixed:LIST")),
        }
    }
}

/// Per-family sampling knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    /// Chance that a per-alternative value is exactly zero.
    pub zero_prob: f64,
    /// Shared coverage universe size is `universe_factor * m`.
    pub universe_factor: usize,
    /// Chance that an alternative covers a given shared element.
    pub cover_prob: f64,
    /// Chance that an alternative also covers an element of its own.
    pub private_prob: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            zero_prob: 0.2,
            universe_factor: 2,
            cover_prob: 0.3,
            private_prob: 0.5,
            gamma_min: 0.3,
            gamma_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub family: FamilyKind,
    pub m: usize,
    pub n: usize,
    pub cost_model: CostModel,
    pub params: FamilyParams,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: FamilyKind, m: usize, n: usize, cost_model: CostModel, seed: u64) -> Self {
        GeneratorSpec {
            family,
            m,
            n,
            cost_model,
            params: FamilyParams::default(),
            seed,
        }
    }

    pub fn instance_id(&self) -> String {
        format!("{}-m{}-n{}-s{}", self.family, self.m, self.n, self.seed)
    }
}

fn sample_values(rng: &mut StreamRng, m: usize, zero_prob: f64) -> Vec<f64> {
    let mut values: Vec<f64> = (0..m)
        .map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if values.iter().all(|&v| v == 0.0) {
        let a = rng.gen_range(0..m);
        values[a] = rng.gen_range(0.5..1.0);
    }
    values
}

fn sample_family(rng: &mut StreamRng, spec: &GeneratorSpec) -> Family {
    let m = spec.m;
    let p = &spec.params;
    match spec.family {
        FamilyKind::Additive => Family::Additive {
            values: sample_values(rng, m, p.zero_prob),
        },
        FamilyKind::MaxValue => Family::MaxValue {
            values: sample_values(rng, m, p.zero_prob),
        },
        FamilyKind::ConcaveOverModular => {
            let gamma = if p.gamma_max > p.gamma_min {
                rng.gen_range(p.gamma_min..=p.gamma_max)
            } else {
                p.gamma_max
            };
            Family::ConcaveOverModular {
                values: sample_values(rng, m, p.zero_prob),
                gamma,
            }
        }
        FamilyKind::Coverage => {
            let shared = (p.universe_factor * m).max(1);
            let mut weights: Vec<f64> = (0..shared).map(|_| rng.gen_range(0.1..1.0)).collect();
            let mut covers: Vec<Vec<usize>> = (0..m)
                .map(|_| (0..shared).filter(|_| rng.gen_bool(p.cover_prob)).collect())
                .collect();
            for cover in covers.iter_mut() {
                if rng.gen_bool(p.private_prob) {
                    cover.push(weights.len());
                    weights.push(rng.gen_range(0.1..1.0));
                }
            }
            if covers.iter().all(Vec::is_empty) {
                covers[rng.gen_range(0..m)].push(0);
            }
            Family::Coverage { weights, covers }
        }
    }
}

fn sample_costs(rng: &mut StreamRng, spec: &GeneratorSpec) -> Result<Vec<Rational>> {
    match &spec.cost_model {
        CostModel::UniformRational { grid } => {
            let grid = i64::from(*grid);
            Ok((0..spec.m)
                .map(|_| Rational::new(rng.gen_range(1..=grid), grid))
                .collect())
        }
        CostModel::Dyadic { max_exponent } => {
            let max_exp = max_exponent.unwrap_or(top_index(spec.m) as u32 + 2);
            Ok((0..spec.m)
                .map(|_| {
                    let j = rng.gen_range(0..=max_exp);
                    let den = 1i64 << j;
                    Rational::new(rng.gen_range(1..=den), den)
                })
                .collect())
        }
        CostModel::Fixed(costs) => {
            if costs.len() != spec.m {
                return Err(Error::InvalidSpec(format!(
                    "{} fixed costs given for m = {}",
                    costs.len(),
                    spec.m
                )));
            }
            Ok(costs.clone())
        }
    }
}

/// Raw instance for a spec; deterministic in the seed.
pub fn generate_raw(spec: &GeneratorSpec) -> Result<RawInstance> {
    if spec.m == 0 || spec.n == 0 {
        return Err(Error::InvalidSpec("m and n must be positive".into()));
    }
    let p = &spec.params;
    let probs_ok = [p.zero_prob, p.cover_prob, p.private_prob]
        .iter()
        .all(|q| (0.0..=1.0).contains(q));
    if !probs_ok || !(p.gamma_min > 0.0 && p.gamma_min <= p.gamma_max && p.gamma_max <= 1.0) {
        return Err(Error::InvalidSpec(format!("bad family parameters {p:?}")));
    }
    let mut cost_rng = stream(spec.seed, "generate/costs");
    let costs = sample_costs(&mut cost_rng, spec)?;
    let mut voter_rng = stream(spec.seed, "generate/voters");
    let voters = (0..spec.n).map(|_| sample_family(&mut voter_rng, spec)).collect();
    Ok(RawInstance { costs, voters })
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    validate_instance(generate_raw(spec)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportMode {
    Exact,
    MonteCarlo { samples: usize, stderr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub method: ElicitationMethod,
    pub mix: f64,
    pub mode: EvalMode,
    pub solver: KnapsackSolver,
}

impl EvalConfig {
    pub fn exact(method: ElicitationMethod) -> Self {
        EvalConfig {
            method,
            mix: crate::aggregation::DEFAULT_MIX,
            mode: EvalMode::Exact,
            solver: KnapsackSolver::ExactDp,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub method: ElicitationMethod,
    pub mix: f64,
    pub solver: KnapsackSolver,
    pub mode: ReportMode,
    pub expected_welfare: f64,
    pub optimal_welfare: f64,
    pub optimal_set: Vec<AlternativeId>,
    /// `optimal / expected`; infinite when the rule earns nothing.
    pub welfare_ratio: f64,
    pub bound_value: f64,
    pub bound_satisfied: bool,
    /// Maximum curvature over the voters.
    pub curvature: f64,
}

/// The welfare each rule is guaranteed to reach, given the maximum voter
/// curvature and the optimum `sw(S*)`.
///
/// Ranking rules: with `L = T + 1` groups and Rule A inclusion rate `rho`
/// (exactly `1/sqrt(m)` for power-of-two `m`), Rule A earns at least
/// `rho * sw(G+ ∩ S*) / L` and Rule B at least
/// `(1 - c) sw(G- ∩ S*) / (2 L sqrt(m))`, so the mixture earns
/// `(1 - c) sw(S*) * min(mix * rho, (1 - mix) / (2 sqrt(m))) / L`. At
/// `mix = 1/2` and power-of-two `m` this is `(1 - c) sw(S*) / (4 (1 + log m) sqrt(m))`.
///
/// Threshold rule: Rule A earns `(1 - eps)(1 - c)/(2T) * sum_t sum_{S*} d_a^t u_t`
/// and Rule B at least `n/m`; together they dominate `sw(S*)`, giving
/// `sw(S*) * min(mix (1 - eps)(1 - c) / (2T), 1 - mix)`, which is
/// `(1 - eps)(1 - c) sw(S*) / (4T)` at `mix = 1/2`.
pub fn bound_value(
    partition: &GroupPartition,
    method: ElicitationMethod,
    mix: f64,
    epsilon: f64,
    curvature: f64,
    optimal: f64,
) -> f64 {
    let m = partition.m() as f64;
    let slack = (1.0 - curvature).max(0.0);
    match method {
        ElicitationMethod::MarginalValues | ElicitationMethod::StandaloneValues => {
            let groups = partition.num_groups() as f64;
            let rho = partition.inclusion_rate();
            slack * optimal * (mix * rho).min((1.0 - mix) / (2.0 * m.sqrt())) / groups
        }
        ElicitationMethod::ThresholdApproval => {
            let levels = partition.threshold_levels() as f64;
            let rule_a = mix * (1.0 - epsilon) * slack / (2.0 * levels);
            optimal * rule_a.min(1.0 - mix)
        }
    }
}

/// Number of support sets exact evaluation would enumerate.
pub fn exact_support_size(instance: &Instance, partition: &GroupPartition, method: ElicitationMethod) -> Result<u128> {
    let m = instance.m() as u128;
    match method.ranking() {
        Some(ranking) => {
            let mut total = m;
            for t in 0..partition.num_groups() {
                let (plus, k) = rule_a_plan(&rank_group(instance, partition, ranking, t), partition)?;
                total = total.saturating_add(binomial(plus.len(), k));
            }
            Ok(total)
        }
        None => Ok(m + partition.threshold_levels() as u128),
    }
}

/// Elicit, aggregate and compare against `S*`.
///
/// Exact mode enumerates every random choice (group or threshold, the rule
/// coin and the Rule A subset). Monte-Carlo mode samples the same pipeline
/// `samples` times from the `(seed, "evaluate/monte-carlo")` stream.
pub fn evaluate(instance: &Instance, config: &EvalConfig, seed: u64) -> Result<EvaluationReport> {
    if !(0.0..=1.0).contains(&config.mix) {
        return Err(Error::InvalidMix(config.mix));
    }
    if let KnapsackSolver::Fptas(eps) = config.solver {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidEpsilon(eps));
        }
    }
    let partition = build_partition(instance);
    let (expected, mode) = match config.mode {
        EvalMode::Exact => {
            let needed = exact_support_size(instance, &partition, config.method)?;
            if needed > EXACT_SUPPORT_LIMIT {
                return Err(Error::ExceedsExactBudget {
                    what: "support sets",
                    needed,
                    budget: EXACT_SUPPORT_LIMIT,
                });
            }
            let dist = match config.method.ranking() {
                Some(ranking) => aggregate_ranking_all_groups(instance, &partition, ranking, config.mix)?,
                None => aggregate_threshold(instance, &partition, config.mix, config.solver)?,
            };
            (expected_welfare(&dist, instance), ReportMode::Exact)
        }
        EvalMode::MonteCarlo { samples } => {
            let mut rng = stream(seed, "evaluate/monte-carlo");
            let (mean, stderr) = monte_carlo(instance, &partition, config, samples, &mut rng)?;
            (mean, ReportMode::MonteCarlo { samples, stderr })
        }
    };
    let optimum = optimal_welfare(instance)?;
    let curvature = instance.max_curvature();
    let bound = bound_value(
        &partition,
        config.method,
        config.mix,
        config.solver.epsilon(),
        curvature,
        optimum.welfare,
    );
    let margin = match mode {
        ReportMode::Exact => 0.0,
        ReportMode::MonteCarlo { stderr, .. } => 3.0 * stderr,
    };
    Ok(EvaluationReport {
        method: config.method,
        mix: config.mix,
        solver: config.solver,
        mode,
        expected_welfare: expected,
        optimal_welfare: optimum.welfare,
        optimal_set: optimum.set,
        welfare_ratio: if expected > 0.0 {
            optimum.welfare / expected
        } else {
            f64::INFINITY
        },
        bound_value: bound,
        bound_satisfied: expected + margin >= bound - BOUND_TOLERANCE,
        curvature,
    })
}

enum SamplingPlan {
    // Per group: Rule A shortlist and subset size.
    Ranking(Vec<(Vec<AlternativeId>, usize)>),
    // Per threshold: the knapsack outcome.
    Threshold(Vec<Vec<AlternativeId>>),
}

fn monte_carlo(
    instance: &Instance,
    partition: &GroupPartition,
    config: &EvalConfig,
    samples: usize,
    rng: &mut StreamRng,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidSpec("Monte-Carlo needs at least one sample".into()));
    }
    let plan = match config.method.ranking() {
        Some(ranking) => SamplingPlan::Ranking(
            (0..partition.num_groups())
                .map(|t| rule_a_plan(&rank_group(instance, partition, ranking, t), partition))
                .collect::<Result<_>>()?,
        ),
        None => SamplingPlan::Threshold(threshold_outcomes(instance, partition, config.solver)?),
    };
    let singles: Vec<f64> = instance
        .alternatives()
        .map(|a| social_welfare(instance, &[a]))
        .collect();
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let value = if rng.gen_bool(config.mix) {
            match &plan {
                SamplingPlan::Ranking(groups) => {
                    let (plus, k) = &groups[rng.gen_range(0..groups.len())];
                    if plus.is_empty() {
                        0.0
                    } else {
                        let picked: Vec<AlternativeId> = index::sample(rng, plus.len(), *k)
                            .into_iter()
                            .map(|j| plus[j])
                            .collect();
                        social_welfare(instance, &picked)
                    }
                }
                SamplingPlan::Threshold(outcomes) => {
                    social_welfare(instance, &outcomes[rng.gen_range(0..outcomes.len())])
                }
            }
        } else {
            singles[rng.gen_range(0..singles.len())]
        };
        let delta = value - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (value - mean);
    }
    let variance = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    Ok((mean, (variance / samples as f64).sqrt()))
}

/// Family label for reports: the common family, or `mixed`.
pub fn family_label(instance: &Instance) -> String {
    let mut kinds = instance.voters().iter().map(|v| v.kind());
    let first = kinds.next().expect("validated instances have voters");
    if kinds.all(|k| k == first) {
        first.name().to_string()
    } else {
        "mixed".to_string()
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub curvature: Option<f64>,
    pub method: String,
    pub mix: f64,
    pub mode: String,
    pub expected_welfare: Option<f64>,
    pub optimal_welfare: Option<f64>,
    pub welfare_ratio: Option<f64>,
    pub bound_value: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub samples: Option<usize>,
    pub stderr: Option<f64>,
}

fn error_tag(err: &Error) -> &'static str {
    match err {
        Error::ExceedsExactBudget { .. } => "exceeds-exact-budget",
        Error::InvalidMix(_) | Error::InvalidEpsilon(_) | Error::InvalidSpec(_) => "invalid-config",
        _ => "invalid-instance",
    }
}

impl ReportRow {
    pub fn from_result(
        instance_id: &str,
        family: &str,
        m: usize,
        n: usize,
        method: ElicitationMethod,
        mix: f64,
        result: &Result<EvaluationReport>,
    ) -> Self {
        let mut row = ReportRow {
            instance_id: instance_id.to_string(),
            family: family.to_string(),
            m,
            n,
            curvature: None,
            method: method.name().to_string(),
            mix,
            mode: String::new(),
            expected_welfare: None,
            optimal_welfare: None,
            welfare_ratio: None,
            bound_value: None,
            bound_satisfied: None,
            samples: None,
            stderr: None,
        };
        match result {
            Ok(report) => {
                row.curvature = Some(report.curvature);
                row.expected_welfare = Some(report.expected_welfare);
                row.optimal_welfare = Some(report.optimal_welfare);
                row.welfare_ratio = Some(report.welfare_ratio);
                row.bound_value = Some(report.bound_value);
                row.bound_satisfied = Some(report.bound_satisfied);
                match report.mode {
                    ReportMode::Exact => row.mode = "exact".into(),
                    ReportMode::MonteCarlo { samples, stderr } => {
                        row.mode = "mc".into();
                        row.samples = Some(samples);
                        row.stderr = Some(stderr);
                    }
                }
            }
            Err(err) => row.mode = format!("error:{}", error_tag(err)),
        }
        row
    }

    pub fn is_error(&self) -> bool {
        self.mode.starts_with("error")
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record([
            "instance_id",
            "family",
            "m",
            "n",
            "curvature",
            "method",
            "mix",
            "mode",
            "expected_welfare",
            "optimal_welfare",
            "welfare_ratio",
            "bound_value",
            "bound_satisfied",
            "samples",
            "stderr",
        ])?;
    }
    for row in rows {
        writer.serialize(row).map_err(std::io::Error::other)?;
    }
    writer.flush()
}

/// Shared evaluation settings for every sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub mix: f64,
    pub mode: EvalMode,
    pub solver: KnapsackSolver,
}

/// Evaluates every `(spec, method)` pair. Cells run in parallel; rows come
/// back in spec-major, method-minor order. Failing cells become error rows.
pub fn sweep(specs: &[GeneratorSpec], methods: &[ElicitationMethod], config: &SweepConfig) -> Vec<ReportRow> {
    let cells: Vec<(usize, ElicitationMethod)> = (0..specs.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, method)| {
            let spec = &specs[i];
            let id = spec.instance_id();
            let family = spec.family.name();
            let eval = EvalConfig {
                method,
                mix: config.mix,
                mode: config.mode,
                solver: config.solver,
            };
            let result = generate(spec).and_then(|inst| evaluate(&inst, &eval, spec.seed));
            ReportRow::from_result(&id, family, spec.m, spec.n, method, config.mix, &result)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_voter_instance() -> Instance {
        validate_instance(RawInstance {
            costs: vec![Rational::new(3, 5); 2],
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
    fn generation_is_deterministic() {
        for family in FamilyKind::ALL {
            let spec = GeneratorSpec::new(family, 6, 3, CostModel::Dyadic { max_exponent: None }, 7);
            assert_eq!(generate_raw(&spec).unwrap(), generate_raw(&spec).unwrap());
        }
        let fixed = GeneratorSpec::new(
            FamilyKind::Additive,
            4,
            2,
            CostModel::Fixed(vec![Rational::new(1, 4); 4]),
            7,
        );
        assert_eq!(generate_raw(&fixed).unwrap(), generate_raw(&fixed).unwrap());
    }

    #[test]
    fn dyadic_costs_have_power_of_two_denominators() {
        let spec = GeneratorSpec::new(FamilyKind::Additive, 20, 1, CostModel::Dyadic { max_exponent: None }, 3);
        for c in generate_raw(&spec).unwrap().costs {
            assert!(c.denom().count_ones() == 1, "{c}");
        }
    }

    #[test]
    fn fixed_costs_must_match_m() {
        let spec = GeneratorSpec::new(
            FamilyKind::Additive,
            3,
            1,
            CostModel::Fixed(vec![Rational::new(1, 2)]),
            0,
        );
        assert!(matches!(generate_raw(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn cost_model_parsing() {
        assert_eq!(
            "uniform:8".parse::<CostModel>().unwrap(),
            CostModel::UniformRational { grid: 8 }
        );
        assert_eq!(
            "dyadic".parse::<CostModel>().unwrap(),
            CostModel::Dyadic { max_exponent: None }
        );
        assert_eq!(
            "fixed:1/2,1/4".parse::<CostModel>().unwrap(),
            CostModel::Fixed(vec![Rational::new(1, 2), Rational::new(1, 4)])
        );
        assert!("uniform:0".parse::<CostModel>().is_err());
        assert!("gaussian".parse::<CostModel>().is_err());
    }

    #[test]
    fn single_alternative_reaches_optimum() {
        let inst = validate_instance(RawInstance {
            costs: vec![Rational::new(1, 1)],
            voters: vec![
                Family::Additive { values: vec![2.0] },
                Family::MaxValue { values: vec![0.3] },
                Family::Additive { values: vec![1.0] },
            ],
        })
        .unwrap();
        for method in ElicitationMethod::ALL {
            let report = evaluate(&inst, &EvalConfig::exact(method), 0).unwrap();
            assert!((report.expected_welfare - 3.0).abs() < 1e-12);
            assert!((report.welfare_ratio - 1.0).abs() < 1e-12);
            assert!(report.bound_satisfied);
        }
    }

    #[test]
    fn threshold_rule_b_share() {
        let inst = two_voter_instance();
        let mix = 0.5;
        let report = evaluate(&inst, &EvalConfig::exact(ElicitationMethod::ThresholdApproval), 0).unwrap();
        let n_over_m = inst.n() as f64 / inst.m() as f64;
        assert!(report.expected_welfare >= n_over_m * (1.0 - mix) - 1e-12);
        assert!(report.bound_satisfied);
    }

    #[test]
    fn bound_matches_closed_forms_at_half() {
        let inst = generate(&GeneratorSpec::new(
            FamilyKind::ConcaveOverModular,
            16,
            3,
            CostModel::Dyadic { max_exponent: None },
            1,
        ))
        .unwrap();
        let p = build_partition(&inst);
        let c = 0.3;
        let opt = 2.0;
        let ranking = bound_value(&p, ElicitationMethod::MarginalValues, 0.5, 0.0, c, opt);
        assert!((ranking - (1.0 - c) * opt / (4.0 * 5.0 * 4.0)).abs() < 1e-15);
        let threshold = bound_value(&p, ElicitationMethod::ThresholdApproval, 0.5, 0.1, c, opt);
        assert!((threshold - 0.9 * (1.0 - c) * opt / 16.0).abs() < 1e-15);
        assert_eq!(
            bound_value(&p, ElicitationMethod::StandaloneValues, 0.5, 0.0, 1.0, opt),
            0.0
        );
    }

    #[test]
    fn exact_budget_is_enforced() {
        // 24 cheap alternatives all in G_1: C(24, 12) Rule A subsets.
        let inst = validate_instance(RawInstance {
            costs: vec![Rational::new(1, 16); 24],
            voters: vec![Family::Additive { values: vec![1.0; 24] }],
        })
        .unwrap();
        let p = build_partition(&inst);
        assert_eq!(p.group(1).len(), 24);
        let err = evaluate(&inst, &EvalConfig::exact(ElicitationMethod::MarginalValues), 0).unwrap_err();
        assert!(matches!(err, Error::ExceedsExactBudget { .. }));
    }

    #[test]
    fn sweep_shapes() {
        let config = SweepConfig {
            mix: 0.5,
            mode: EvalMode::Exact,
            solver: KnapsackSolver::ExactDp,
        };
        assert!(sweep(&[], &ElicitationMethod::ALL, &config).is_empty());
        let specs: Vec<GeneratorSpec> = (0..2)
            .map(|s| GeneratorSpec::new(FamilyKind::Coverage, 4, 2, CostModel::UniformRational { grid: 12 }, s))
            .collect();
        let rows = sweep(&specs, &ElicitationMethod::ALL, &config);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[1].method, "value-rank");
        assert_eq!(rows[3].instance_id, "coverage-m4-n2-s1");
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&rows, &mut a).unwrap();
        write_csv(&sweep(&specs, &ElicitationMethod::ALL, &config), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_marks_failed_cells() {
        let config = SweepConfig {
            mix: 0.5,
            mode: EvalMode::Exact,
            solver: KnapsackSolver::ExactDp,
        };
        let bad = GeneratorSpec::new(FamilyKind::Additive, 3, 1, CostModel::Fixed(vec![]), 0);
        let good = GeneratorSpec::new(FamilyKind::Additive, 3, 1, CostModel::UniformRational { grid: 4 }, 0);
        let rows = sweep(&[bad, good], &[ElicitationMethod::ThresholdApproval], &config);
        assert!(rows[0].is_error());
        assert_eq!(rows[0].mode, "error:invalid-config");
        assert!(!rows[1].is_error());
    }
}
