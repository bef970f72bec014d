//! Brute-force reference: exact second-stage recourse for a fixed
//! reservation, first-stage evaluation, and exhaustive search over every
//! reservation subset.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{validate_instance, Instance, Plan, Recourse};
use crate::scenario::{Scenario, ScenarioSet};
use crate::{DEMAND_SLACK, MONEY_TOL};

/// Largest fleet [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_MACHINE_LIMIT: usize = 16;

/// Largest total capacity [`second_stage_exhaustive`] accepts.
pub const EXHAUSTIVE_QUBIT_LIMIT: u64 = 64;

/// Second-stage decisions for one scenario, indexed by machine.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRecourse {
    pub on_demand_units: u64,
    pub qubits: Vec<u64>,
    pub qubits_on_demand: u64,
    /// Equal to `qubits` on remote machines; zero on the hub.
    pub bell_pairs: Vec<u64>,
    /// Unweighted cost of this recourse.
    pub cost: f64,
}

impl DenseRecourse {
    fn zero(machines: usize) -> Self {
        Self {
            on_demand_units: 0,
            qubits: vec![0; machines],
            qubits_on_demand: 0,
            bell_pairs: vec![0; machines],
            cost: 0.0,
        }
    }

    pub fn to_recourse(&self, instance: &Instance) -> Recourse {
        let ids: Vec<String> = instance.machines.iter().map(|m| m.id.clone()).collect();
        Recourse::from_dense(
            &ids,
            instance.hub_index().unwrap_or(0),
            self.on_demand_units,
            &self.qubits,
            self.qubits_on_demand,
            &self.bell_pairs,
        )
    }
}

/// Per-scenario view of the instance for a fixed reservation mask.
struct Sources {
    hub: usize,
    hub_cap: u64,
    /// (machine, usable qubits) for reserved remote machines, by index.
    remote: Vec<(usize, u64)>,
}

impl Sources {
    fn new(instance: &Instance, scenario: &Scenario, reserved: &[bool]) -> Self {
        let hub = instance.hub_index().expect("validated instance");
        let usable = |i: usize| {
            instance.machines[i]
                .capacity_qubits
                .min(scenario.availability[i])
        };
        let hub_cap = if reserved[hub] { usable(hub) } else { 0 };
        let remote = (0..instance.machine_count())
            .filter(|&i| i != hub && reserved[i])
            .map(|i| (i, usable(i).min(instance.bell_capacity(i).unwrap_or(0))))
            .collect();
        Self {
            hub,
            hub_cap,
            remote,
        }
    }
}

fn covers(effective: f64, demand: u64) -> bool {
    effective >= demand as f64 - DEMAND_SLACK
}

fn cheaper(cost: f64, best: f64) -> bool {
    cost < best - 1e-9 * best.abs().max(1.0)
}

fn tied(cost: f64, best: f64) -> bool {
    !cheaper(cost, best) && !cheaper(best, cost)
}

/// Cheapest recourse for one scenario with the reservation fixed.
///
/// For each on-demand unit count the demand is filled from the hub and the
/// on-demand units first (one effective qubit per qubit at the plain qubit
/// price), then from reserved remote machines, whose qubits count `f` each
/// and also pay a Bell pair. Remote machines share a per-effective-qubit
/// price, so any fill order among them is optimal. Ties between unit counts
/// go to more on-demand units.
pub fn second_stage_optimal(
    instance: &Instance,
    scenario: &Scenario,
    reserved: &BTreeSet<String>,
) -> Result<DenseRecourse> {
    let mask = reservation_mask(instance, reserved)?;
    second_stage_for_mask(instance, scenario, &mask).ok_or(Error::ScenarioInfeasible { scenario: 0 })
}

pub(crate) fn reservation_mask(instance: &Instance, reserved: &BTreeSet<String>) -> Result<Vec<bool>> {
    let mut mask = vec![false; instance.machine_count()];
    for i in instance.indices_of(reserved)? {
        mask[i] = true;
    }
    Ok(mask)
}

fn second_stage_for_mask(
    instance: &Instance,
    scenario: &Scenario,
    reserved: &[bool],
) -> Option<DenseRecourse> {
    let n = instance.machine_count();
    let demand = scenario.demand_qubits;
    if demand == 0 {
        return Some(DenseRecourse::zero(n));
    }
    let sources = Sources::new(instance, scenario, reserved);
    let f = scenario.fidelity;

    let mut best: Option<DenseRecourse> = None;
    for y in 0..=instance.on_demand.max_units {
        let Some(candidate) = greedy_fill(instance, &sources, demand, f, y) else {
            continue;
        };
        let replace = match &best {
            None => true,
            Some(b) => cheaper(candidate.cost, b.cost) || tied(candidate.cost, b.cost),
        };
        if replace {
            best = Some(candidate);
        }
    }
    // Sanity: every returned recourse covers the demand.
    debug_assert!(best.as_ref().is_none_or(|r| {
        let hub = sources.hub;
        let remote: u64 = (0..n).filter(|&i| i != hub).map(|i| r.qubits[i]).sum();
        covers(r.qubits[hub] as f64 + r.qubits_on_demand as f64 + f * remote as f64, demand)
    }));
    best
}

fn greedy_fill(
    instance: &Instance,
    sources: &Sources,
    demand: u64,
    fidelity: f64,
    units: u64,
) -> Option<DenseRecourse> {
    let n = instance.machine_count();
    let costs = &instance.costs;
    let od_cap = units * instance.on_demand.capacity_qubits;

    let mut rec = DenseRecourse::zero(n);
    rec.on_demand_units = units;
    let take_hub = sources.hub_cap.min(demand);
    let take_od = od_cap.min(demand - take_hub);
    rec.qubits[sources.hub] = take_hub;
    rec.qubits_on_demand = take_od;
    let residual = demand - take_hub - take_od;

    if residual > 0 {
        if fidelity <= 0.0 {
            return None;
        }
        let needed = remote_qubits_needed(residual, fidelity);
        let mut left = needed;
        for &(i, cap) in &sources.remote {
            let take = cap.min(left);
            rec.qubits[i] = take;
            left -= take;
            if left == 0 {
                break;
            }
        }
        if left > 0 {
            return None;
        }
    }

    // Drop surplus qubits, most expensive per qubit first.
    let effective = |r: &DenseRecourse| -> f64 {
        let remote: u64 = sources.remote.iter().map(|&(i, _)| r.qubits[i]).sum();
        r.qubits[sources.hub] as f64 + r.qubits_on_demand as f64 + fidelity * remote as f64
    };
    for &(i, _) in sources.remote.iter().rev() {
        while rec.qubits[i] > 0 && covers(effective(&rec) - fidelity, demand) {
            rec.qubits[i] -= 1;
        }
    }
    while rec.qubits_on_demand > 0 && covers(effective(&rec) - 1.0, demand) {
        rec.qubits_on_demand -= 1;
    }
    while rec.qubits[sources.hub] > 0 && covers(effective(&rec) - 1.0, demand) {
        rec.qubits[sources.hub] -= 1;
    }

    for &(i, _) in &sources.remote {
        rec.bell_pairs[i] = rec.qubits[i];
    }
    let qubits: u64 = rec.qubits.iter().sum::<u64>() + rec.qubits_on_demand;
    let bells: u64 = rec.bell_pairs.iter().sum();
    rec.cost = costs.on_demand_cost * units as f64
        + costs.qubit_cost * qubits as f64
        + costs.bell_pair_cost * bells as f64;
    Some(rec)
}

/// Smallest `k` with `fidelity * k >= residual` (up to the demand slack).
fn remote_qubits_needed(residual: u64, fidelity: f64) -> u64 {
    let target = residual as f64 - DEMAND_SLACK;
    let mut k = libm::ceil(target / fidelity).max(0.0) as u64;
    while k > 0 && fidelity * (k - 1) as f64 >= target {
        k -= 1;
    }
    while fidelity * (k as f64) < target {
        k += 1;
    }
    k
}

/// Enumerates every integer recourse for one scenario and returns the
/// cheapest. Only for cross-checking [`second_stage_optimal`] on instances
/// whose usable capacity (hub, reserved remotes and all on-demand units)
/// is at most [`EXHAUSTIVE_QUBIT_LIMIT`].
pub fn second_stage_exhaustive(
    instance: &Instance,
    scenario: &Scenario,
    reserved: &BTreeSet<String>,
) -> Result<DenseRecourse> {
    let mask = reservation_mask(instance, reserved)?;
    let sources = Sources::new(instance, scenario, &mask);
    let od = &instance.on_demand;
    let total = sources.hub_cap
        + sources.remote.iter().map(|&(_, c)| c).sum::<u64>()
        + od.max_units * od.capacity_qubits;
    if total > EXHAUSTIVE_QUBIT_LIMIT {
        return Err(Error::TooLarge {
            machines: instance.machine_count(),
            limit: EXHAUSTIVE_QUBIT_LIMIT as usize,
        });
    }

    let n = instance.machine_count();
    let costs = &instance.costs;
    let f = scenario.fidelity;
    let mut best: Option<DenseRecourse> = None;
    let mut remote = vec![0u64; sources.remote.len()];

    for y in 0..=od.max_units {
        for q_hub in 0..=sources.hub_cap {
            for q_od in 0..=y * od.capacity_qubits {
                loop {
                    let remote_sum: u64 = remote.iter().sum();
                    let effective = q_hub as f64 + q_od as f64 + f * remote_sum as f64;
                    if covers(effective, scenario.demand_qubits) {
                        let cost = costs.on_demand_cost * y as f64
                            + costs.qubit_cost * (q_hub + q_od + remote_sum) as f64
                            + costs.bell_pair_cost * remote_sum as f64;
                        if best.as_ref().is_none_or(|b| cheaper(cost, b.cost)) {
                            let mut rec = DenseRecourse::zero(n);
                            rec.on_demand_units = y;
                            rec.qubits[sources.hub] = q_hub;
                            rec.qubits_on_demand = q_od;
                            for (&(i, _), &q) in sources.remote.iter().zip(&remote) {
                                rec.qubits[i] = q;
                                rec.bell_pairs[i] = q;
                            }
                            rec.cost = cost;
                            best = Some(rec);
                        }
                    }
                    // Odometer over the remote allocations.
                    let mut k = 0;
                    while k < remote.len() {
                        if remote[k] < sources.remote[k].1 {
                            remote[k] += 1;
                            break;
                        }
                        remote[k] = 0;
                        k += 1;
                    }
                    if k == remote.len() {
                        break;
                    }
                }
            }
        }
    }
    best.ok_or(Error::ScenarioInfeasible { scenario: 0 })
}

/// Expected cost of a reservation and the recourse chosen in each scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageEvaluation {
    pub expected_cost: f64,
    pub recourse: Vec<DenseRecourse>,
}

impl FirstStageEvaluation {
    pub fn recourse_only(&self, instance: &Instance, reserved_count: usize) -> f64 {
        self.expected_cost - instance.costs.reserve_cost * reserved_count as f64
    }
}

/// Reservation cost plus the probability-weighted optimal recourse cost.
/// A reservation that leaves any scenario uncoverable is infeasible, also
/// when that scenario has zero probability.
pub fn evaluate_first_stage(
    instance: &Instance,
    scenarios: &ScenarioSet,
    reserved: &BTreeSet<String>,
) -> Result<f64> {
    evaluate_first_stage_detailed(instance, scenarios, reserved).map(|e| e.expected_cost)
}

pub fn evaluate_first_stage_detailed(
    instance: &Instance,
    scenarios: &ScenarioSet,
    reserved: &BTreeSet<String>,
) -> Result<FirstStageEvaluation> {
    validate_instance(instance, scenarios).into_result()?;
    let mask = reservation_mask(instance, reserved)?;
    evaluate_mask(instance, scenarios, &mask)
}

fn evaluate_mask(
    instance: &Instance,
    scenarios: &ScenarioSet,
    mask: &[bool],
) -> Result<FirstStageEvaluation> {
    let count = mask.iter().filter(|&&r| r).count();
    let mut expected_cost = instance.costs.reserve_cost * count as f64;
    let mut recourse = Vec::with_capacity(scenarios.len());
    for s in scenarios.iter() {
        let Some(rec) = second_stage_for_mask(instance, s, mask) else {
            return Err(Error::Infeasible);
        };
        expected_cost += s.probability * rec.cost;
        recourse.push(rec);
    }
    Ok(FirstStageEvaluation {
        expected_cost,
        recourse,
    })
}

/// Evaluates every reservation subset and returns the cheapest plan. Ties
/// (within the money tolerance) go to fewer reservations, then to more
/// on-demand units across positive-probability scenarios, then to the
/// earliest subset in enumeration order.
pub fn solve_exhaustive(instance: &Instance, scenarios: &ScenarioSet) -> Result<Plan> {
    let n = instance.machine_count();
    if n > EXHAUSTIVE_MACHINE_LIMIT {
        return Err(Error::TooLarge {
            machines: n,
            limit: EXHAUSTIVE_MACHINE_LIMIT,
        });
    }
    validate_instance(instance, scenarios).into_result()?;

    let mut best: Option<(Vec<bool>, FirstStageEvaluation, usize, u64)> = None;
    for bits in 0u32..(1u32 << n) {
        let mask: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let Ok(eval) = evaluate_mask(instance, scenarios, &mask) else {
            continue;
        };
        let count = bits.count_ones() as usize;
        let units: u64 = scenarios
            .iter()
            .zip(&eval.recourse)
            .filter(|(s, _)| s.probability > 0.0)
            .map(|(_, r)| r.on_demand_units)
            .sum();
        let better = match &best {
            None => true,
            Some((_, b, b_count, b_units)) => {
                let (z, bz) = (eval.expected_cost, b.expected_cost);
                z < bz - MONEY_TOL
                    || ((z - bz).abs() <= MONEY_TOL
                        && (count < *b_count || (count == *b_count && units > *b_units)))
            }
        };
        if better {
            best = Some((mask, eval, count, units));
        }
    }

    let (mask, eval, _, _) = best.ok_or(Error::Infeasible)?;
    Ok(Plan {
        reserved: instance
            .machines
            .iter()
            .zip(&mask)
            .filter(|(_, &r)| r)
            .map(|(m, _)| m.id.clone())
            .collect(),
        recourse: eval.recourse.iter().map(|r| r.to_recourse(instance)).collect(),
        objective: eval.expected_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cost_of_plan, CostParams, MachineSpec};
    use crate::scenario::make_paper_scenarios;

    fn ids(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| String::from(*s)).collect()
    }

    /// Hub without qubits plus one remote machine behind a half-fidelity
    /// link; demand 10.
    pub(crate) fn remote_only(max_units: u64) -> (Instance, Scenario) {
        let machines = vec![
            MachineSpec {
                id: "hub".into(),
                capacity_qubits: 257,
            },
            MachineSpec {
                id: "far".into(),
                capacity_qubits: 257,
            },
        ];
        let mut inst = Instance::star(machines, 0, CostParams::default(), 127, 10);
        inst.links[0].bell_capacity = 127;
        inst.on_demand.max_units = max_units;
        let s = Scenario {
            probability: 1.0,
            demand_qubits: 10,
            availability: vec![0, 127],
            fidelity: 0.5,
        };
        (inst, s)
    }

    #[test]
    fn first_case_study_scenario_uses_the_hub() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let rec = second_stage_optimal(&inst, &set[0], &ids(&["qc0"])).unwrap();
        assert_eq!(rec.on_demand_units, 0);
        assert_eq!(rec.qubits[0], 10);
        assert_eq!(rec.cost, 10000.0);
    }

    #[test]
    fn remote_qubits_pay_for_fidelity() {
        let (inst, s) = remote_only(0);
        let rec = second_stage_optimal(&inst, &s, &ids(&["far"])).unwrap();
        assert_eq!(rec.qubits[1], 20);
        assert_eq!(rec.bell_pairs[1], 20);
        assert_eq!(rec.cost, 29000.0);
        let brute = second_stage_exhaustive(&inst, &s, &ids(&["far"]));
        // 127 usable remote qubits exceed the enumeration limit.
        assert!(matches!(brute, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn remote_case_matches_enumeration_when_small() {
        let (mut inst, mut s) = remote_only(0);
        inst.links[0].bell_capacity = 30;
        s.availability[1] = 30;
        let greedy = second_stage_optimal(&inst, &s, &ids(&["far"])).unwrap();
        let brute = second_stage_exhaustive(&inst, &s, &ids(&["far"])).unwrap();
        assert_eq!(greedy.cost, 29000.0);
        assert_eq!(brute.cost, greedy.cost);
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let rec = second_stage_optimal(&inst, &set[1], &ids(&[])).unwrap();
        assert_eq!(rec, DenseRecourse::zero(10));
    }

    #[test]
    fn uncoverable_scenario_is_infeasible() {
        let (inst, s) = remote_only(0);
        assert_eq!(
            second_stage_optimal(&inst, &s, &ids(&["hub"])),
            Err(Error::ScenarioInfeasible { scenario: 0 })
        );
    }

    #[test]
    fn first_stage_evaluations() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        assert!((evaluate_first_stage(&inst, &set, &ids(&["qc0"])).unwrap() - 13000.0).abs() < 1e-9);
        assert!((evaluate_first_stage(&inst, &set, &ids(&[])).unwrap() - 28000.0).abs() < 1e-9);
        let set = make_paper_scenarios(0.0, 10).unwrap();
        assert_eq!(evaluate_first_stage(&inst, &set, &ids(&[])).unwrap(), 0.0);
    }

    #[test]
    fn exhaustive_case_study() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let plan = solve_exhaustive(&inst, &set).unwrap();
        assert!((plan.objective - 13000.0).abs() < 1e-6);
        assert_eq!(plan.reserved, ids(&["qc0"]));
        assert!((cost_of_plan(&inst, &set, &plan).unwrap() - plan.objective).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_below_threshold_deploys_on_demand() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.1, 10).unwrap();
        let plan = solve_exhaustive(&inst, &set).unwrap();
        assert!((plan.objective - 3500.0).abs() < 1e-6);
        assert!(plan.reserved.is_empty());
        assert_eq!(plan.recourse[0].on_demand_units, 1);
    }

    #[test]
    fn exhaustive_threshold_tie_prefers_on_demand() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.2, 10).unwrap();
        let plan = solve_exhaustive(&inst, &set).unwrap();
        assert!((plan.objective - 7000.0).abs() < 1e-6);
        assert!(plan.reserved.is_empty());
    }

    #[test]
    fn exhaustive_trivial_instance() {
        let inst = Instance::star(
            vec![MachineSpec {
                id: "a".into(),
                capacity_qubits: 4,
            }],
            0,
            CostParams::default(),
            127,
            0,
        );
        let set = ScenarioSet::single(Scenario {
            probability: 1.0,
            demand_qubits: 0,
            availability: vec![4],
            fidelity: 1.0,
        });
        let plan = solve_exhaustive(&inst, &set).unwrap();
        assert_eq!(plan, Plan::empty(1));
    }

    #[test]
    fn exhaustive_rejects_large_fleets() {
        let mut inst = Instance::case_study();
        for i in 10..17 {
            inst.machines.push(MachineSpec {
                id: alloc::format!("qc{i}"),
                capacity_qubits: 1,
            });
        }
        let set = make_paper_scenarios(0.5, 17).unwrap();
        assert!(matches!(
            solve_exhaustive(&inst, &set),
            Err(Error::TooLarge { machines: 17, .. })
        ));
    }

    #[test]
    fn needed_remote_qubits() {
        assert_eq!(remote_qubits_needed(10, 0.5), 20);
        assert_eq!(remote_qubits_needed(3, 0.3), 10);
        assert_eq!(remote_qubits_needed(1, 0.3), 4);
        assert_eq!(remote_qubits_needed(7, 1.0), 7);
        assert_eq!(remote_qubits_needed(7, 0.7), 10);
    }
}
