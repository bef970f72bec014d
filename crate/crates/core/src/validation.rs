//! Randomized cross-check of the MILP pipeline against the brute-force
//! oracle.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formulation::{build_deterministic_equivalent, extract_plan};
use crate::milp::{solve_milp, verify_solution, MilpStatus, SolveOptions};
use crate::model::{cost_of_plan, CostParams, Instance, MachineSpec, OnDemandSpec};
use crate::oracle::solve_exhaustive;
use crate::scenario::{Scenario, ScenarioSet};
use crate::MONEY_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceSpec {
    pub max_machines: usize,
    pub max_scenarios: usize,
    pub max_demand: u64,
    pub max_capacity: u64,
    pub min_fidelity: f64,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        Self {
            max_machines: 6,
            max_scenarios: 4,
            max_demand: 40,
            max_capacity: 30,
            min_fidelity: 0.3,
        }
    }
}

/// Instance `index` of the randomized family seeded by `seed`.
pub fn random_instance(spec: &RandomInstanceSpec, seed: u64, index: u64) -> (Instance, ScenarioSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);

    let n = rng.random_range(1..=spec.max_machines.max(1));
    let machines: Vec<MachineSpec> = (0..n)
        .map(|i| MachineSpec {
            id: format!("m{i}"),
            capacity_qubits: rng.random_range(0..=spec.max_capacity),
        })
        .collect();
    let hub = rng.random_range(0..n);
    let costs = CostParams {
        reserve_cost: f64::from(rng.random_range(10..=100u32)) * 100.0,
        qubit_cost: f64::from(rng.random_range(1..=20u32)) * 100.0,
        bell_pair_cost: f64::from(rng.random_range(0..=10u32)) * 100.0,
        on_demand_cost: f64::from(rng.random_range(20..=400u32)) * 100.0,
    };

    let s_count = rng.random_range(1..=spec.max_scenarios.max(1));
    let weights: Vec<u32> = (0..s_count).map(|_| rng.random_range(1..=10)).collect();
    let total: u32 = weights.iter().sum();
    let scenarios: Vec<Scenario> = weights
        .iter()
        .map(|&w| Scenario {
            probability: f64::from(w) / f64::from(total),
            demand_qubits: rng.random_range(0..=spec.max_demand),
            availability: (0..n).map(|_| rng.random_range(0..=spec.max_capacity)).collect(),
            fidelity: rng.random_range(spec.min_fidelity..=1.0),
        })
        .collect();
    let set = ScenarioSet::new(scenarios);

    let mut instance = Instance::star(machines, hub, costs, 0, 0);
    for link in &mut instance.links {
        link.bell_capacity = rng.random_range(0..=spec.max_capacity);
    }
    let od_capacity = rng.random_range(5..=30);
    let full = OnDemandSpec::default_max_units(od_capacity, set.max_demand());
    instance.on_demand = OnDemandSpec {
        capacity_qubits: od_capacity,
        // Occasionally too few units, so infeasible instances show up too.
        max_units: if rng.random_bool(0.15) { rng.random_range(0..full) } else { full },
    };
    (instance, set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub milp_objective: Option<f64>,
    pub oracle_objective: Option<f64>,
    pub matched: bool,
    /// Verifier, plan invariants and objective recomputation all passed
    /// (vacuously true when infeasible).
    pub verified: bool,
    pub detail: String,
}

/// Solves one instance both ways and compares.
pub fn check_case(instance: &Instance, scenarios: &ScenarioSet, options: &SolveOptions) -> Result<CaseOutcome> {
    let de = build_deterministic_equivalent(instance, scenarios)?;
    let solution = solve_milp(&de.model, options)?;
    let mut detail = String::new();
    let (milp_objective, verified) = match solution.status {
        MilpStatus::Infeasible => (None, true),
        MilpStatus::Optimal => {
            let mut ok = true;
            if let Err(e) = verify_solution(&de.model, &solution.values, 1e-9, 1e-6) {
                ok = false;
                detail = format!("verifier: {e}");
            }
            let plan = extract_plan(&de, &solution)?;
            if let Err(e) = plan.check(instance, scenarios) {
                ok = false;
                detail = format!("plan: {e}");
            }
            let recomputed = cost_of_plan(instance, scenarios, &plan)?;
            if (recomputed - solution.objective).abs() > MONEY_TOL {
                ok = false;
                detail = format!("cost_of_plan {recomputed} vs objective {}", solution.objective);
            }
            (Some(solution.objective), ok)
        }
    };
    let oracle_objective = match solve_exhaustive(instance, scenarios) {
        Ok(plan) => Some(plan.objective),
        Err(Error::Infeasible) => None,
        Err(e) => return Err(e),
    };
    let matched = match (milp_objective, oracle_objective) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= MONEY_TOL,
        _ => false,
    };
    if !matched && detail.is_empty() {
        detail = format!("milp {milp_objective:?} vs oracle {oracle_objective:?}");
    }
    Ok(CaseOutcome {
        milp_objective,
        oracle_objective,
        matched,
        verified,
        detail,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationSummary {
    pub total: usize,
    pub matched: usize,
    pub verified: usize,
    pub infeasible: usize,
    /// One outcome per instance, in index order. A solver error shows up as
    /// an unmatched, unverified outcome carrying the error text.
    pub outcomes: Vec<CaseOutcome>,
}

impl ValidationSummary {
    pub fn all_passed(&self) -> bool {
        self.matched == self.total && self.verified == self.total
    }

    /// (instance index, description) for every failed case.
    pub fn failures(&self) -> Vec<(usize, &str)> {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| !(o.matched && o.verified))
            .map(|(i, o)| (i, o.detail.as_str()))
            .collect()
    }
}

/// Cross-checks `count` randomized instances. Solver errors count as
/// failures rather than aborting the run.
pub fn run_validation(
    spec: &RandomInstanceSpec,
    count: usize,
    seed: u64,
    options: &SolveOptions,
) -> ValidationSummary {
    let mut summary = ValidationSummary {
        total: count,
        ..Default::default()
    };
    for index in 0..count as u64 {
        let (instance, scenarios) = random_instance(spec, seed, index);
        let outcome = check_case(&instance, &scenarios, options).unwrap_or_else(|e| CaseOutcome {
            milp_objective: None,
            oracle_objective: None,
            matched: false,
            verified: false,
            detail: format!("{e}"),
        });
        summary.matched += usize::from(outcome.matched);
        summary.verified += usize::from(outcome.verified);
        summary.infeasible += usize::from(outcome.matched && outcome.oracle_objective.is_none());
        summary.outcomes.push(outcome);
    }
    summary
}
