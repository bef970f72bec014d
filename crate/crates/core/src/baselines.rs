//! Comparison models: the expected-value formulation (EVF) and random
//! first-stage selection, both evaluated with optimal recourse under the
//! true scenario set.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formulation::solve_plan;
use crate::milp::SolveOptions;
use crate::model::Instance;
use crate::oracle::evaluate_first_stage;
use crate::scenario::{average_scenario, ScenarioSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BaselineModel {
    Evf,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineResult {
    pub model: BaselineModel,
    /// True expected cost; for the random model, the mean over feasible draws.
    pub expected_cost: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub deterministic_cost: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub mean: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub min: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub max: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub infeasible_trials: Option<usize>,
    /// EVF reservation.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub reserved: BTreeSet<String>,
    /// Expected cost of each random draw, `None` when infeasible.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub draws: Vec<Option<f64>>,
}

/// Solves the single averaged scenario, fixes its reservation, and prices
/// that reservation under the real scenarios.
pub fn solve_evf(
    instance: &Instance,
    scenarios: &ScenarioSet,
    options: &SolveOptions,
) -> Result<BaselineResult> {
    let averaged = ScenarioSet::single(average_scenario(scenarios));
    let (plan, _, _) = solve_plan(instance, &averaged, options)?;
    let expected_cost = evaluate_first_stage(instance, scenarios, &plan.reserved)?;
    Ok(BaselineResult {
        model: BaselineModel::Evf,
        expected_cost,
        deterministic_cost: Some(plan.objective),
        mean: None,
        min: None,
        max: None,
        infeasible_trials: None,
        reserved: plan.reserved,
        draws: Vec::new(),
    })
}

/// How the random baseline draws a reservation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RandomSelection {
    /// Each machine independently with probability 1/2.
    #[default]
    Bernoulli,
    /// A subset size uniform on `0..=n`, then a uniform subset of that size.
    UniformSize,
}

fn draw_reservation(
    instance: &Instance,
    selection: RandomSelection,
    rng: &mut ChaCha8Rng,
) -> BTreeSet<String> {
    let n = instance.machine_count();
    let chosen: Vec<usize> = match selection {
        RandomSelection::Bernoulli => (0..n).filter(|_| rng.random_bool(0.5)).collect(),
        RandomSelection::UniformSize => {
            let k = rng.random_range(0..=n);
            let mut order: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = rng.random_range(i..n);
                order.swap(i, j);
            }
            order.truncate(k);
            order
        }
    };
    chosen
        .into_iter()
        .map(|i| instance.machines[i].id.clone())
        .collect()
}

/// Draws `trials` random reservations and reports the mean, min and max
/// expected cost over the feasible ones. Trial `t` uses stream `t` of the
/// generator seeded with `seed`, so results do not depend on evaluation
/// order.
pub fn solve_random(
    instance: &Instance,
    scenarios: &ScenarioSet,
    trials: usize,
    seed: u64,
    selection: RandomSelection,
) -> Result<BaselineResult> {
    if trials == 0 {
        return Err(Error::BadArgument("trials must be at least 1".into()));
    }
    let mut draws = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let reserved = draw_reservation(instance, selection, &mut rng);
        match evaluate_first_stage(instance, scenarios, &reserved) {
            Ok(cost) => draws.push(Some(cost)),
            Err(Error::Infeasible) => draws.push(None),
            Err(e) => return Err(e),
        }
    }
    let feasible: Vec<f64> = draws.iter().flatten().copied().collect();
    if feasible.is_empty() {
        return Err(Error::AllInfeasible { trials });
    }
    let mean = feasible.iter().sum::<f64>() / feasible.len() as f64;
    let min = feasible.iter().copied().fold(f64::INFINITY, f64::min);
    let max = feasible.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BaselineResult {
        model: BaselineModel::Random,
        expected_cost: mean,
        deterministic_cost: None,
        mean: Some(mean),
        min: Some(min),
        max: Some(max),
        infeasible_trials: Some(trials - feasible.len()),
        reserved: BTreeSet::new(),
        draws,
    })
}

/// Expected cost with perfect information: each scenario solved on its own
/// (reservation included), weighted by probability.
pub fn wait_and_see_bound(
    instance: &Instance,
    scenarios: &ScenarioSet,
    options: &SolveOptions,
) -> Result<f64> {
    let mut total = 0.0;
    for s in scenarios.iter() {
        let (plan, _, _) = solve_plan(instance, &ScenarioSet::single(s.clone()), options)?;
        total += s.probability * plan.objective;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::solve_plan;
    use crate::model::{CostParams, MachineSpec};
    use crate::scenario::{make_paper_scenarios, Scenario};
    use alloc::vec;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn evf_at_default_probability() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let evf = solve_evf(&inst, &set, &opts()).unwrap();
        assert_eq!(evf.reserved.len(), 1);
        assert!((evf.deterministic_cost.unwrap() - 13000.0).abs() < 1e-6);
        assert!((evf.expected_cost - 13000.0).abs() < 1e-6);
    }

    #[test]
    fn evf_at_low_probability_still_reserves() {
        // Averaged demand is 1 qubit: reserving the hub (5000 + 1000) beats
        // an on-demand unit (25000 + 1000) in the deterministic model.
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.1, 10).unwrap();
        let evf = solve_evf(&inst, &set, &opts()).unwrap();
        assert_eq!(evf.reserved.iter().collect::<Vec<_>>(), ["qc0"]);
        assert!((evf.deterministic_cost.unwrap() - 6000.0).abs() < 1e-6);
        assert!((evf.expected_cost - 6000.0).abs() < 1e-6);
        let proposed = solve_plan(&inst, &set, &opts()).unwrap().0;
        assert!((proposed.objective - 3500.0).abs() < 1e-6);
    }

    #[test]
    fn evf_equals_proposed_without_uncertainty() {
        let inst = Instance::case_study();
        let set = ScenarioSet::single(Scenario {
            probability: 1.0,
            demand_qubits: 40,
            availability: vec![30; 10],
            fidelity: 0.6,
        });
        let evf = solve_evf(&inst, &set, &opts()).unwrap();
        let proposed = solve_plan(&inst, &set, &opts()).unwrap().0;
        assert!((evf.expected_cost - proposed.objective).abs() < 1e-6);
    }

    #[test]
    fn random_is_seeded_and_bounded_below() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let a = solve_random(&inst, &set, 200, 42, RandomSelection::Bernoulli).unwrap();
        let b = solve_random(&inst, &set, 200, 42, RandomSelection::Bernoulli).unwrap();
        assert_eq!(a, b);
        assert!(a.mean.unwrap() >= 13000.0 - 1e-6);
        assert!(a.min.unwrap() >= 13000.0 - 1e-6);
        assert_eq!(a.infeasible_trials, Some(0));
        let c = solve_random(&inst, &set, 200, 43, RandomSelection::Bernoulli).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn random_single_machine_single_trial() {
        let inst = Instance::star(
            vec![MachineSpec {
                id: "only".into(),
                capacity_qubits: 50,
            }],
            0,
            CostParams::default(),
            127,
            12,
        );
        let set = ScenarioSet::single(Scenario {
            probability: 1.0,
            demand_qubits: 12,
            availability: vec![50],
            fidelity: 1.0,
        });
        let r = solve_random(&inst, &set, 1, 5, RandomSelection::Bernoulli).unwrap();
        let draw = r.draws[0].unwrap();
        assert_eq!(r.mean, Some(draw));
        assert!(draw == 17000.0 || draw == 37000.0, "{draw}");
    }

    #[test]
    fn random_all_infeasible() {
        let mut inst = Instance::case_study();
        inst.on_demand.max_units = 0;
        let set = ScenarioSet::single(Scenario {
            probability: 1.0,
            demand_qubits: 10,
            availability: vec![0; 10],
            fidelity: 1.0,
        });
        assert_eq!(
            solve_random(&inst, &set, 3, 1, RandomSelection::Bernoulli),
            Err(Error::AllInfeasible { trials: 3 })
        );
        assert!(solve_random(&inst, &set, 0, 1, RandomSelection::Bernoulli).is_err());
    }

    #[test]
    fn uniform_size_selection_is_seeded() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let a = solve_random(&inst, &set, 50, 9, RandomSelection::UniformSize).unwrap();
        let b = solve_random(&inst, &set, 50, 9, RandomSelection::UniformSize).unwrap();
        assert_eq!(a, b);
        assert!(a.mean.unwrap() >= 13000.0 - 1e-6);
    }

    #[test]
    fn wait_and_see_is_a_lower_bound() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let ws = wait_and_see_bound(&inst, &set, &opts()).unwrap();
        // Scenario 1 alone: reserve the hub for 15000; scenario 2 costs 0.
        assert!((ws - 12000.0).abs() < 1e-6);
        assert!(ws <= 13000.0 + 1e-6);
    }
}
