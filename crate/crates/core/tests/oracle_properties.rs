use std::collections::BTreeSet;

use proptest::prelude::*;
use qnet_alloc_core::baselines::{solve_evf, solve_random, RandomSelection};
use qnet_alloc_core::formulation::solve_plan;
use qnet_alloc_core::milp::SolveOptions;
use qnet_alloc_core::oracle::{
    evaluate_first_stage, evaluate_first_stage_detailed, second_stage_exhaustive,
    second_stage_optimal, solve_exhaustive,
};
use qnet_alloc_core::validation::{check_case, random_instance, RandomInstanceSpec};
use qnet_alloc_core::{cost_of_plan, Error, Instance};

fn subset(inst: &Instance, mask: u16) -> BTreeSet<String> {
    inst.machines
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, m)| m.id.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn greedy_recourse_matches_enumeration(seed in any::<u64>(), mask in any::<u16>()) {
        let spec = RandomInstanceSpec {
            max_machines: 4,
            max_capacity: 12,
            max_demand: 30,
            ..RandomInstanceSpec::default()
        };
        let (mut inst, set) = random_instance(&spec, seed, 0);
        inst.on_demand.capacity_qubits = inst.on_demand.capacity_qubits.min(8);
        inst.on_demand.max_units = inst.on_demand.max_units.min(2);
        let reserved = subset(&inst, mask);
        for s in set.iter() {
            let exhaustive = match second_stage_exhaustive(&inst, s, &reserved) {
                Err(Error::TooLarge { .. }) => continue,
                other => other,
            };
            let greedy = second_stage_optimal(&inst, s, &reserved);
            match (greedy, exhaustive) {
                (Ok(g), Ok(e)) => prop_assert!((g.cost - e.cost).abs() <= 1e-6, "{} vs {}", g.cost, e.cost),
                (Err(_), Err(_)) => {}
                (g, e) => prop_assert!(false, "greedy {:?} vs exhaustive {:?}", g, e),
            }
        }
    }

    #[test]
    fn reserving_more_never_raises_recourse_cost(seed in any::<u64>(), small in any::<u16>(), extra in any::<u16>()) {
        let (inst, set) = random_instance(&RandomInstanceSpec::default(), seed, 0);
        let a = subset(&inst, small);
        let b = subset(&inst, small | extra);
        let (Ok(ea), Ok(eb)) = (
            evaluate_first_stage_detailed(&inst, &set, &a),
            evaluate_first_stage_detailed(&inst, &set, &b),
        ) else {
            return Ok(());
        };
        prop_assert!(eb.recourse_only(&inst, b.len()) <= ea.recourse_only(&inst, a.len()) + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn milp_agrees_with_the_oracle(seed in any::<u64>()) {
        let (inst, set) = random_instance(&RandomInstanceSpec::default(), seed, 0);
        let outcome = check_case(&inst, &set, &SolveOptions::default()).unwrap();
        prop_assert!(outcome.matched, "{}", outcome.detail);
        prop_assert!(outcome.verified, "{}", outcome.detail);
    }

    #[test]
    fn oracle_plan_is_consistent(seed in any::<u64>()) {
        let (inst, set) = random_instance(&RandomInstanceSpec::default(), seed, 5);
        let Ok(plan) = solve_exhaustive(&inst, &set) else { return Ok(()) };
        plan.check(&inst, &set).unwrap();
        let recomputed = cost_of_plan(&inst, &set, &plan).unwrap();
        prop_assert!((recomputed - plan.objective).abs() <= 1e-6);
        let evaluated = evaluate_first_stage(&inst, &set, &plan.reserved).unwrap();
        prop_assert!((evaluated - plan.objective).abs() <= 1e-6);
    }

    #[test]
    fn baselines_never_beat_the_stochastic_plan(seed in any::<u64>()) {
        let (inst, set) = random_instance(&RandomInstanceSpec::default(), seed, 6);
        let options = SolveOptions::default();
        let Ok((plan, _, _)) = solve_plan(&inst, &set, &options) else { return Ok(()) };
        if let Ok(evf) = solve_evf(&inst, &set, &options) {
            prop_assert!(evf.expected_cost >= plan.objective - 1e-6);
        }
        if let Ok(random) = solve_random(&inst, &set, 16, seed, RandomSelection::Bernoulli) {
            for draw in random.draws.iter().flatten() {
                prop_assert!(*draw >= plan.objective - 1e-6);
            }
            prop_assert!(random.expected_cost >= plan.objective - 1e-6);
            let again = solve_random(&inst, &set, 16, seed, RandomSelection::Bernoulli).unwrap();
            prop_assert_eq!(random.expected_cost, again.expected_cost);
        }
    }
}
