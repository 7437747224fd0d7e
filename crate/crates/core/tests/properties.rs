use proptest::prelude::*;

use subpb::aggregation::{rule_a_plan, EXACT_SUPPORT_LIMIT};
use subpb::experiment::{exact_support_size, CostModel};
use subpb::instance::rational_to_f64;
use subpb::partition::top_index;
use subpb::{
    aggregate_ranking_all_groups, aggregate_threshold, approval_profile, build_partition, evaluate, expected_welfare,
    generate, harmonic_scores, knapsack_exact, knapsack_fptas, optimal_welfare, rank_group, social_welfare,
    validate_instance, AlternativeId, ElicitationMethod, EvalConfig, Family, FamilyKind, GeneratorSpec, Instance,
    KnapsackProblem, KnapsackSolver, RankingMethod, Rational, RawInstance,
};

fn any_family() -> impl Strategy<Value = FamilyKind> {
    prop::sample::select(FamilyKind::ALL.to_vec())
}

fn any_cost_model() -> impl Strategy<Value = CostModel> {
    prop_oneof![
        Just(CostModel::Dyadic { max_exponent: None }),
        (1u32..120).prop_map(|grid| CostModel::UniformRational { grid }),
    ]
}

fn instance(family: FamilyKind, m: usize, n: usize, model: CostModel, seed: u64) -> Instance {
    generate(&GeneratorSpec::new(family, m, n, model, seed)).unwrap()
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

fn brute_force(problem: &KnapsackProblem) -> u64 {
    (0u32..1 << problem.len())
        .map(|mask| (0..problem.len()).filter(|&a| mask >> a & 1 == 1).collect::<Vec<_>>())
        .filter(|s| problem.is_feasible(s))
        .map(|s| problem.profit(&s))
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn groups_partition_by_cost(
        family in any_family(), m in 1usize..20, model in any_cost_model(), seed in any::<u64>()
    ) {
        let inst = instance(family, m, 1, model, seed);
        let p = build_partition(&inst);
        prop_assert_eq!(p.top(), top_index(m));
        let mut seen = vec![0; m];
        for t in 0..p.num_groups() {
            for &a in p.group(t) {
                seen[a] += 1;
                let c = inst.cost(a);
                prop_assert!(c <= p.upper(t));
                prop_assert!(t == 0 || c > p.lower(t));
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn scores_sum_to_n_harmonic(
        family in any_family(), m in 1usize..14, n in 1usize..6, seed in any::<u64>(), by_value in any::<bool>()
    ) {
        let inst = instance(family, m, n, CostModel::Dyadic { max_exponent: None }, seed);
        let p = build_partition(&inst);
        let method = if by_value { RankingMethod::StandaloneValues } else { RankingMethod::MarginalValues };
        for t in 0..p.num_groups() {
            let profile = rank_group(&inst, &p, method, t);
            let scores = harmonic_scores(&profile).unwrap();
            let expected = n as f64 * harmonic(p.group(t).len());
            prop_assert!((scores.total() - expected).abs() < 1e-9);
            let (plus, k) = rule_a_plan(&profile, &p).unwrap();
            prop_assert!(plus.len() <= p.shortlist_cap(t));
            prop_assert!(k <= plus.len());
            if t == 0 {
                prop_assert_eq!(plus, p.group(0).to_vec());
            }
        }
    }

    #[test]
    fn approval_weights_cover_histogram(
        family in any_family(), m in 1usize..14, n in 1usize..6, seed in any::<u64>()
    ) {
        let inst = instance(family, m, n, CostModel::UniformRational { grid: 50 }, seed);
        let p = build_partition(&inst);
        for (j, alpha) in p.thresholds().into_iter().enumerate() {
            let profile = approval_profile(&inst, &p, alpha);
            let t = j + 1;
            for a in inst.alternatives() {
                prop_assert!(profile.weights()[a] >= profile.histogram()[a][t.min(p.threshold_levels())]);
                prop_assert_eq!(profile.histogram()[a].iter().sum::<u64>(), n as u64);
            }
        }
    }

    #[test]
    fn rules_produce_valid_distributions(
        family in any_family(), m in 1usize..10, n in 1usize..5, model in any_cost_model(),
        seed in any::<u64>(), mix in 0.0f64..=1.0
    ) {
        let inst = instance(family, m, n, model, seed);
        let p = build_partition(&inst);
        let best = optimal_welfare(&inst).unwrap();
        prop_assert!(inst.is_feasible(&best.set));
        for method in [RankingMethod::MarginalValues, RankingMethod::StandaloneValues] {
            let dist = aggregate_ranking_all_groups(&inst, &p, method, mix).unwrap();
            prop_assert!(dist.is_valid_for(&inst));
            prop_assert!(expected_welfare(&dist, &inst) <= best.welfare + 1e-9);
        }
        let dist = aggregate_threshold(&inst, &p, mix, KnapsackSolver::ExactDp).unwrap();
        prop_assert!(dist.is_valid_for(&inst));
        prop_assert!(expected_welfare(&dist, &inst) <= best.welfare + 1e-9);
    }

    #[test]
    fn optimum_dominates_every_feasible_set(
        family in any_family(), m in 1usize..9, n in 1usize..4, seed in any::<u64>()
    ) {
        let inst = instance(family, m, n, CostModel::UniformRational { grid: 10 }, seed);
        let best = optimal_welfare(&inst).unwrap();
        for mask in 0u32..1 << m {
            let set: Vec<AlternativeId> = (0..m).filter(|&a| mask >> a & 1 == 1).collect();
            if inst.is_feasible(&set) {
                prop_assert!(social_welfare(&inst, &set) <= best.welfare + 1e-12);
            }
        }
    }

    #[test]
    fn knapsack_matches_enumeration(
        m in 1usize..13, seed in any::<u64>(), profits in prop::collection::vec(0u64..30, 13)
    ) {
        let inst = instance(FamilyKind::Additive, m, 1, CostModel::UniformRational { grid: 12 }, seed);
        let problem = KnapsackProblem::for_instance(&inst, profits[..m].to_vec());
        let exact = knapsack_exact(&problem);
        prop_assert!(problem.is_feasible(&exact));
        let opt = brute_force(&problem);
        prop_assert_eq!(problem.profit(&exact), opt);
        for eps in [0.5, 0.25, 0.1] {
            let approx = knapsack_fptas(&problem, eps).unwrap();
            prop_assert!(problem.is_feasible(&approx));
            prop_assert!(problem.profit(&approx) as f64 >= (1.0 - eps) * opt as f64);
        }
    }

    #[test]
    fn ratio_at_least_one_and_bounds_hold(
        family in any_family(), m in 1usize..11, n in 1usize..5, model in any_cost_model(), seed in any::<u64>()
    ) {
        let inst = instance(family, m, n, model, seed);
        for method in ElicitationMethod::ALL {
            let report = evaluate(&inst, &EvalConfig::exact(method), seed).unwrap();
            prop_assert!(report.welfare_ratio >= 1.0 - 1e-12);
            prop_assert!(report.bound_satisfied);
        }
    }
}

#[test]
fn low_value_bin_needs_a_term_per_item() {
    // Every project is worth exactly 1/m to every voter and costs 1/m, so all
    // mass sits in the lowest value bin and S* is the whole set.
    let m = 4;
    let inst = validate_instance(RawInstance {
        costs: vec![Rational::new(1, m as i64); m],
        voters: vec![Family::Additive { values: vec![1.0; m] }; 3],
    })
    .unwrap();
    let p = build_partition(&inst);
    let hist = approval_profile(&inst, &p, p.thresholds()[0]).histogram().to_vec();
    let best = optimal_welfare(&inst).unwrap();
    assert_eq!(best.welfare, 3.0);
    let high: f64 = best
        .set
        .iter()
        .map(|&a| {
            (1..=p.top())
                .map(|t| hist[a][t] as f64 * rational_to_f64(&p.upper(t)))
                .sum::<f64>()
        })
        .sum();
    assert_eq!(high, 0.0);
    // A single n/m term undercounts; one term per selected item does not.
    assert!(best.welfare > 3.0 / m as f64 + high);
    let per_item: f64 = best.set.iter().map(|&a| hist[a][0] as f64 / m as f64).sum();
    assert!(best.welfare <= per_item + high + 1e-12);
}

#[test]
fn non_power_of_two_sizes_evaluate() {
    for m in [3usize, 5, 6, 7, 12] {
        for family in FamilyKind::ALL {
            let inst = instance(family, m, 3, CostModel::Dyadic { max_exponent: None }, m as u64);
            for method in ElicitationMethod::ALL {
                let report = evaluate(&inst, &EvalConfig::exact(method), 1).unwrap();
                assert!(report.bound_satisfied, "{family} m={m} {method}");
            }
        }
    }
}

#[test]
fn support_size_counts_every_branch() {
    let inst = instance(FamilyKind::Additive, 8, 2, CostModel::Dyadic { max_exponent: None }, 3);
    let p = build_partition(&inst);
    let size = exact_support_size(&inst, &p, ElicitationMethod::MarginalValues).unwrap();
    assert!(size <= EXACT_SUPPORT_LIMIT);
    assert!(size >= 8);
    let threshold = exact_support_size(&inst, &p, ElicitationMethod::ThresholdApproval).unwrap();
    assert_eq!(threshold, 8 + 3);
}
