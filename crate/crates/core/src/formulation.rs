//! Deterministic-equivalent MILP of the two-stage program and the mapping
//! from solver output back to a [`Plan`].
//!
//! Variables, in index order:
//! - `x_i` in {0,1}: machine `i` reserved (first stage);
//! - per scenario `w`: `y` on-demand units, `q_i` qubits on each machine,
//!   `q_od` qubits on on-demand units, `b_i` Bell pairs for each non-hub
//!   machine.
//!
//! Rows per scenario:
//! - C1 `q_i <= min(cap_i, avail_i) * x_i`
//! - C2 `q_od <= cap_od * y`
//! - C3 `q_hub + f * sum(q_remote) + q_od >= demand`
//! - C4 `b_i = q_i` for non-hub `i`
//! - C5 `b_i <= bell_capacity_i`

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::milp::{solve_milp, MilpModel, MilpSolution, MilpStatus, Relation, SolveOptions};
use crate::model::{validate_instance, Instance, Plan, Recourse};
use crate::scenario::ScenarioSet;
use crate::DEMAND_SLACK;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRole {
    Reserve { machine: usize },
    OnDemandUnits { scenario: usize },
    Qubits { machine: usize, scenario: usize },
    OnDemandQubits { scenario: usize },
    BellPairs { machine: usize, scenario: usize },
}

/// Bidirectional map between variable indices and their roles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndexMap {
    roles: Vec<VarRole>,
    lookup: BTreeMap<VarRole, usize>,
}

impl IndexMap {
    fn push(&mut self, role: VarRole) -> usize {
        let index = self.roles.len();
        self.roles.push(role);
        self.lookup.insert(role, index);
        index
    }

    pub fn role(&self, index: usize) -> Option<VarRole> {
        self.roles.get(index).copied()
    }

    pub fn index(&self, role: VarRole) -> Option<usize> {
        self.lookup.get(&role).copied()
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicEquivalent {
    pub model: MilpModel,
    pub index: IndexMap,
    pub machine_ids: Vec<String>,
    pub hub: usize,
    pub scenario_count: usize,
}

impl DeterministicEquivalent {
    fn var(&self, role: VarRole) -> usize {
        self.index.index(role).expect("role present by construction")
    }

    pub fn reserve_vars(&self) -> Vec<usize> {
        (0..self.machine_ids.len())
            .map(|machine| self.var(VarRole::Reserve { machine }))
            .collect()
    }
}

/// Variable count for `machines` machines (one of them the hub) and
/// `scenarios` scenarios.
pub fn expected_variable_count(machines: usize, scenarios: usize) -> usize {
    machines + scenarios * (1 + machines + 1 + machines.saturating_sub(1))
}

/// Row count: C1 per machine, C2, C3, and C4 + C5 per non-hub machine.
pub fn expected_constraint_count(machines: usize, scenarios: usize) -> usize {
    scenarios * (machines + 2 + 2 * machines.saturating_sub(1))
}

pub fn build_deterministic_equivalent(
    instance: &Instance,
    scenarios: &ScenarioSet,
) -> Result<DeterministicEquivalent> {
    validate_instance(instance, scenarios).into_result()?;
    let n = instance.machine_count();
    let hub = instance.hub_index().expect("validated");
    let costs = &instance.costs;
    let od = &instance.on_demand;

    let mut model = MilpModel::new();
    let mut index = IndexMap::default();
    let ids: Vec<String> = instance.machines.iter().map(|m| m.id.clone()).collect();

    let x: Vec<usize> = (0..n)
        .map(|i| {
            let v = model.add_variable(format!("x_{}", ids[i]), 0.0, 1.0, true, costs.reserve_cost);
            index.push(VarRole::Reserve { machine: i });
            v
        })
        .collect();

    let mut fewer_reservations = Vec::new();
    let mut more_on_demand = Vec::new();
    let mut idle_zero_mass = Vec::new();
    // Last two keys only pick a canonical point among exact ties: lower
    // machine indices first. Powers of two make reservation sets distinct;
    // for qubits, increasing weights suffice because tied allocations share
    // their totals.
    let mut canonical_reserve = Vec::new();
    let mut canonical_qubits = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        fewer_reservations.push((xi, 1.0));
        canonical_reserve.push((xi, libm::ldexp(1.0, i as i32)));
    }

    for (w, s) in scenarios.iter().enumerate() {
        let p = s.probability;
        let usable: Vec<u64> = instance
            .machines
            .iter()
            .zip(&s.availability)
            .map(|(m, &a)| m.capacity_qubits.min(a))
            .collect();
        let od_cap = od.capacity_qubits as f64;

        let y = model.add_variable(
            format!("y_s{w}"),
            0.0,
            od.max_units as f64,
            true,
            p * costs.on_demand_cost,
        );
        index.push(VarRole::OnDemandUnits { scenario: w });
        let q: Vec<usize> = (0..n)
            .map(|i| {
                let v = model.add_variable(
                    format!("q_{}_s{w}", ids[i]),
                    0.0,
                    usable[i] as f64,
                    true,
                    p * costs.qubit_cost,
                );
                index.push(VarRole::Qubits {
                    machine: i,
                    scenario: w,
                });
                v
            })
            .collect();
        let q_od = model.add_variable(
            format!("qod_s{w}"),
            0.0,
            od.max_units as f64 * od_cap,
            true,
            p * costs.qubit_cost,
        );
        index.push(VarRole::OnDemandQubits { scenario: w });
        canonical_qubits.extend(q.iter().enumerate().map(|(i, &v)| (v, (i + 1) as f64)));
        canonical_qubits.push((q_od, (n + 1) as f64));
        let mut b = vec![None; n];
        for i in (0..n).filter(|&i| i != hub) {
            let cap = instance.bell_capacity(i).expect("validated") as f64;
            b[i] = Some(model.add_variable(
                format!("b_{}_s{w}", ids[i]),
                0.0,
                cap,
                true,
                p * costs.bell_pair_cost,
            ));
            index.push(VarRole::BellPairs {
                machine: i,
                scenario: w,
            });
        }

        // C1
        for i in 0..n {
            model.add_constraint(
                vec![(q[i], 1.0), (x[i], -(usable[i] as f64))],
                Relation::Le,
                0.0,
            );
        }
        // C2
        model.add_constraint(vec![(q_od, 1.0), (y, -od_cap)], Relation::Le, 0.0);
        // C3
        let mut demand_terms = vec![(q[hub], 1.0)];
        demand_terms.extend((0..n).filter(|&i| i != hub).map(|i| (q[i], s.fidelity)));
        demand_terms.push((q_od, 1.0));
        let rhs = if s.demand_qubits == 0 {
            0.0
        } else {
            s.demand_qubits as f64 - DEMAND_SLACK
        };
        model.add_constraint(demand_terms, Relation::Ge, rhs);
        // C4, C5
        for i in (0..n).filter(|&i| i != hub) {
            let bi = b[i].expect("non-hub");
            model.add_constraint(vec![(bi, 1.0), (q[i], -1.0)], Relation::Eq, 0.0);
            let cap = instance.bell_capacity(i).expect("validated") as f64;
            model.add_constraint(vec![(bi, 1.0)], Relation::Le, cap);
        }

        if p > 0.0 {
            more_on_demand.push((y, -1.0));
        } else {
            idle_zero_mass.push((y, costs.on_demand_cost));
            idle_zero_mass.extend(q.iter().map(|&v| (v, costs.qubit_cost)));
            idle_zero_mass.push((q_od, costs.qubit_cost));
            idle_zero_mass.extend(b.iter().flatten().map(|&v| (v, costs.bell_pair_cost)));
        }
    }

    model.branch_first = x.clone();
    model.tiebreaks = [
        fewer_reservations,
        more_on_demand,
        idle_zero_mass,
        canonical_reserve,
        canonical_qubits,
    ]
        .into_iter()
        .filter(|t| !t.is_empty())
        .collect();

    Ok(DeterministicEquivalent {
        model,
        index,
        machine_ids: ids,
        hub,
        scenario_count: scenarios.len(),
    })
}

/// Reads a [`Plan`] out of an optimal solution of `de.model`.
pub fn extract_plan(de: &DeterministicEquivalent, solution: &MilpSolution) -> Result<Plan> {
    if solution.status != MilpStatus::Optimal {
        return Err(Error::NotOptimal);
    }
    if solution.values.len() != de.model.num_variables() {
        return Err(Error::StructureMismatch(format!(
            "solution has {} values for {} variables",
            solution.values.len(),
            de.model.num_variables()
        )));
    }
    let n = de.machine_ids.len();
    let int = |role: VarRole| -> u64 {
        let v = solution.values[de.var(role)];
        libm::round(v).max(0.0) as u64
    };

    let reserved: BTreeSet<String> = (0..n)
        .filter(|&machine| solution.values[de.var(VarRole::Reserve { machine })] >= 0.5)
        .map(|i| de.machine_ids[i].clone())
        .collect();

    let recourse = (0..de.scenario_count)
        .map(|scenario| {
            let qubits: Vec<u64> = (0..n)
                .map(|machine| int(VarRole::Qubits { machine, scenario }))
                .collect();
            let bells: Vec<u64> = (0..n)
                .map(|machine| {
                    de.index
                        .index(VarRole::BellPairs { machine, scenario })
                        .map_or(0, |j| libm::round(solution.values[j]).max(0.0) as u64)
                })
                .collect();
            Recourse::from_dense(
                &de.machine_ids,
                de.hub,
                int(VarRole::OnDemandUnits { scenario }),
                &qubits,
                int(VarRole::OnDemandQubits { scenario }),
                &bells,
            )
        })
        .collect();

    Ok(Plan {
        reserved,
        recourse,
        objective: solution.objective,
    })
}

/// Builds, solves and extracts the stochastic plan in one call.
pub fn solve_plan(
    instance: &Instance,
    scenarios: &ScenarioSet,
    options: &SolveOptions,
) -> Result<(Plan, MilpSolution, DeterministicEquivalent)> {
    let de = build_deterministic_equivalent(instance, scenarios)?;
    let solution = solve_milp(&de.model, options)?;
    if solution.status == MilpStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    let plan = extract_plan(&de, &solution)?;
    Ok((plan, solution, de))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cost_of_plan, CostParams, MachineSpec};
    use crate::scenario::{make_paper_scenarios, Scenario};

    #[test]
    fn case_study_model_size() {
        let inst = Instance::case_study();
        let de = build_deterministic_equivalent(&inst, &make_paper_scenarios(0.8, 10).unwrap())
            .unwrap();
        assert_eq!(de.model.num_variables(), 52);
        assert_eq!(expected_variable_count(10, 2), 52);
        assert_eq!(de.model.num_constraints(), expected_constraint_count(10, 2));
        assert_eq!(de.model.num_constraints(), 60);
        assert_eq!(de.index.len(), 52);
        for j in 0..52 {
            assert_eq!(de.index.index(de.index.role(j).unwrap()), Some(j));
        }
    }

    fn hub_only() -> (Instance, ScenarioSet) {
        let inst = Instance::star(
            vec![MachineSpec {
                id: "solo".into(),
                capacity_qubits: 20,
            }],
            0,
            CostParams::default(),
            127,
            5,
        );
        let set = ScenarioSet::single(Scenario {
            probability: 1.0,
            demand_qubits: 5,
            availability: vec![20],
            fidelity: 1.0,
        });
        (inst, set)
    }

    #[test]
    fn hub_only_model_has_no_bell_variables() {
        let (inst, set) = hub_only();
        let de = build_deterministic_equivalent(&inst, &set).unwrap();
        let names: Vec<&str> = de.model.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["x_solo", "y_s0", "q_solo_s0", "qod_s0"]);
        assert_eq!(de.model.num_constraints(), 3);
    }

    #[test]
    fn zero_demand_admits_zero_recourse() {
        let (inst, mut set) = hub_only();
        set.scenarios[0].demand_qubits = 0;
        let de = build_deterministic_equivalent(&inst, &set).unwrap();
        let c3 = &de.model.constraints[2];
        assert_eq!((c3.relation, c3.rhs), (Relation::Ge, 0.0));
        let zeros = vec![0.0; de.model.num_variables()];
        crate::milp::verify_solution(&de.model, &zeros, 1e-9, 1e-6).unwrap();
    }

    #[test]
    fn invalid_input_is_rejected() {
        let (mut inst, set) = hub_only();
        inst.hub_id = "ghost".into();
        assert!(matches!(
            build_deterministic_equivalent(&inst, &set),
            Err(Error::ValidationFailed(_))
        ));
    }

    #[test]
    fn default_solve_reserves_the_hub() {
        let inst = Instance::case_study();
        let set = make_paper_scenarios(0.8, 10).unwrap();
        let de = build_deterministic_equivalent(&inst, &set).unwrap();
        let sol = solve_milp(&de.model, &SolveOptions::default()).unwrap();
        let plan = extract_plan(&de, &sol).unwrap();
        assert_eq!(plan.reserved.iter().collect::<Vec<_>>(), ["qc0"]);
        assert_eq!(plan.recourse[0].qubits_used.get("qc0"), Some(&10));
        assert!((plan.objective - 13000.0).abs() < 1e-6);
        assert!((cost_of_plan(&inst, &set, &plan).unwrap() - plan.objective).abs() < 1e-6);
        plan.check(&inst, &set).unwrap();
    }

    #[test]
    fn all_zero_demand_reserves_nothing() {
        let inst = Instance::case_study();
        let mut set = make_paper_scenarios(0.6, 10).unwrap();
        set.scenarios[0].demand_qubits = 0;
        let de = build_deterministic_equivalent(&inst, &set).unwrap();
        let sol = solve_milp(&de.model, &SolveOptions::default()).unwrap();
        let plan = extract_plan(&de, &sol).unwrap();
        assert!(plan.reserved.is_empty());
        assert_eq!(plan.objective, 0.0);
    }

    #[test]
    fn non_optimal_solution_is_rejected() {
        let (inst, set) = hub_only();
        let de = build_deterministic_equivalent(&inst, &set).unwrap();
        assert_eq!(
            extract_plan(&de, &MilpSolution::infeasible(0)),
            Err(Error::NotOptimal)
        );
    }

    #[test]
    fn lp_dump_has_all_sections() {
        let (inst, set) = hub_only();
        let de = build_deterministic_equivalent(&inst, &set).unwrap();
        let text = de.model.to_lp_string();
        for section in ["Minimize", "Subject To", "Bounds", "Generals", "End"] {
            assert!(text.contains(section), "{text}");
        }
        assert!(text.contains(" c2: q_solo_s0 + qod_s0 >= "), "{text}");
    }
}
