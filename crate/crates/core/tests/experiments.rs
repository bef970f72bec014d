use qnet_alloc_core::baselines::RandomSelection;
use qnet_alloc_core::experiments::{grid, run_cost_sweep, run_probability_sweep, CostSweepConfig};
use qnet_alloc_core::milp::SolveOptions;
use qnet_alloc_core::Instance;

#[test]
fn breakdown_along_the_default_grid() {
    let inst = Instance::case_study();
    let rows: Vec<_> = run_probability_sweep(&inst, &grid(0.0, 1.0, 0.05).unwrap(), &SolveOptions::default())
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(rows.len(), 21);
    for pair in rows.windows(2) {
        assert!(pair[1].total >= pair[0].total - 1e-6);
    }
    for r in &rows {
        let sum = r.reservation_cost + r.expected_on_demand_cost + r.expected_qubit_cost + r.expected_bell_cost;
        assert!((sum - r.total).abs() <= 1e-6);
        if r.p1 <= 0.2 {
            assert_eq!(r.reservation_cost, 0.0, "p1={}", r.p1);
        }
        if r.p1 >= 0.3 {
            assert!(r.reservation_cost > 0.0, "p1={}", r.p1);
        }
    }
    assert_eq!(rows[0].total, 0.0);
}

#[test]
fn huge_on_demand_price_leaves_pure_reservation() {
    let config = CostSweepConfig {
        p1: 0.8,
        trials: 20,
        seed: 3,
        selection: RandomSelection::Bernoulli,
    };
    let rows = run_cost_sweep(&Instance::case_study(), &[2e9, 1e9], &config, &SolveOptions::default()).unwrap();
    let rows: Vec<_> = rows.into_iter().map(Result::unwrap).collect();
    assert_eq!(rows[0].on_demand_cost, 1e9);
    for r in &rows {
        assert!((r.proposed_total - 13000.0).abs() <= 1e-6);
    }
}

#[test]
fn single_scenario_single_machine_evf_equals_proposed() {
    use qnet_alloc_core::baselines::solve_evf;
    use qnet_alloc_core::formulation::solve_plan;
    use qnet_alloc_core::{CostParams, MachineSpec, Scenario, ScenarioSet};
    let machines = vec![MachineSpec { id: "only".into(), capacity_qubits: 50 }];
    let inst = Instance::star(machines, 0, CostParams::default(), 127, 20);
    let set = ScenarioSet::single(Scenario {
        probability: 1.0,
        demand_qubits: 20,
        availability: vec![50],
        fidelity: 1.0,
    });
    let options = SolveOptions::default();
    let (plan, _, _) = solve_plan(&inst, &set, &options).unwrap();
    let evf = solve_evf(&inst, &set, &options).unwrap();
    assert_eq!(plan.objective, evf.expected_cost);
}
