use std::collections::BTreeSet;

use proptest::prelude::*;
use qnet_alloc_core::oracle::solve_exhaustive;
use qnet_alloc_core::scenario::{average_scenario, make_paper_scenarios, sample_scenarios, SampleBounds};
use qnet_alloc_core::validation::{random_instance, RandomInstanceSpec};
use qnet_alloc_core::{cost_of_plan, Instance, Plan, ScenarioSet};

fn feasible_case(seed: u64) -> Option<(Instance, ScenarioSet, Plan)> {
    let (inst, set) = random_instance(&RandomInstanceSpec::default(), seed, 0);
    let plan = solve_exhaustive(&inst, &set).ok()?;
    Some((inst, set, plan))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_is_linear_in_prices(seed in any::<u64>(), lambda in 0.01f64..100.0) {
        let Some((inst, set, plan)) = feasible_case(seed) else { return Ok(()) };
        let base = cost_of_plan(&inst, &set, &plan).unwrap();
        let scaled_inst = inst.with_costs(inst.costs.scaled(lambda));
        let scaled = cost_of_plan(&scaled_inst, &set, &plan).unwrap();
        prop_assert!((scaled - lambda * base).abs() <= 1e-9 * (lambda * base).abs().max(1.0));
    }

    #[test]
    fn cost_is_monotone_in_each_decision(seed in any::<u64>(), pick in 0usize..5, w in 0usize..4) {
        let Some((inst, set, plan)) = feasible_case(seed) else { return Ok(()) };
        let base = cost_of_plan(&inst, &set, &plan).unwrap();
        let mut bumped = plan.clone();
        let w = w % set.len();
        let machine = inst.machines[w % inst.machine_count()].id.clone();
        let remote = inst.machines.iter().find(|m| m.id != inst.hub_id).map(|m| m.id.clone());
        let rec = &mut bumped.recourse[w];
        match pick {
            0 => { bumped.reserved.insert(machine); }
            1 => rec.on_demand_units += 1,
            2 => *rec.qubits_used.entry(machine).or_default() += 1,
            3 => rec.qubits_on_demand += 1,
            _ => match remote {
                Some(id) => *rec.bell_pairs.entry(id).or_default() += 1,
                None => return Ok(()),
            },
        }
        let after = cost_of_plan(&inst, &set, &bumped).unwrap();
        prop_assert!(after >= base - 1e-12);
    }

    #[test]
    fn case_study_scenarios_are_distributions(p1 in 0.0f64..=1.0, n in 1usize..12) {
        let set = make_paper_scenarios(p1, n).unwrap();
        prop_assert!((set.total_probability() - 1.0).abs() <= 1e-9);
        prop_assert!(set.iter().all(|s| (0.0..=1.0).contains(&s.fidelity)));
        prop_assert!(set.iter().all(|s| s.availability.len() == n));
        let avg = average_scenario(&set);
        prop_assert!((0.0..=1.0).contains(&avg.fidelity));
    }

    #[test]
    fn sampling_is_pure_and_normalized(
        seed in any::<u64>(),
        n in 1usize..8,
        machines in 1usize..6,
        d_lo in 0u64..20,
        d_span in 0u64..20,
        f_lo in 0.0f64..0.5,
    ) {
        let bounds = SampleBounds {
            demand: d_lo..=d_lo + d_span,
            availability: 0..=50,
            fidelity: f_lo..=1.0,
        };
        let a = sample_scenarios(&bounds, machines, n, seed).unwrap();
        let b = sample_scenarios(&bounds, machines, n, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!((a.total_probability() - 1.0).abs() <= 1e-9);
        for s in a.iter() {
            prop_assert!(bounds.demand.contains(&s.demand_qubits));
            prop_assert!(bounds.fidelity.contains(&s.fidelity));
            prop_assert!(s.availability.iter().all(|v| *v <= 50));
        }
    }
}

#[test]
fn extreme_probabilities_put_all_mass_on_one_scenario() {
    for p1 in [0.0, 1.0] {
        let set = make_paper_scenarios(p1, 10).unwrap();
        let heavy: Vec<_> = set.iter().filter(|s| s.probability == 1.0).collect();
        assert_eq!(heavy.len(), 1);
        assert!(set.iter().all(|s| s.probability == 1.0 || s.probability == 0.0));
    }
}

#[test]
fn empty_plan_costs_nothing() {
    let inst = Instance::case_study();
    let set = make_paper_scenarios(0.5, 10).unwrap();
    assert_eq!(cost_of_plan(&inst, &set, &Plan::empty(2)).unwrap(), 0.0);
    let mut plan = Plan::empty(2);
    plan.reserved = BTreeSet::from(["qc3".to_string()]);
    assert_eq!(cost_of_plan(&inst, &set, &plan).unwrap(), 5000.0);
}
