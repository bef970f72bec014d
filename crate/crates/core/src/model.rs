//! Static system description, plans, and objective recomputation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scenario::ScenarioSet;

pub const DEFAULT_MACHINE_COUNT: usize = 10;
pub const DEFAULT_MACHINE_CAPACITY: u64 = 257;
pub const DEFAULT_ON_DEMAND_CAPACITY: u64 = 127;

/// Tolerance on the sum of scenario probabilities.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Unit prices. All values are money in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostParams {
    /// Per reserved machine, paid in the first stage.
    pub reserve_cost: f64,
    /// Per qubit used on any machine, reserved or on-demand.
    pub qubit_cost: f64,
    /// Per Bell pair consumed to teleport a remote qubit to the hub.
    pub bell_pair_cost: f64,
    /// Per on-demand machine deployed in the second stage.
    pub on_demand_cost: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            reserve_cost: 5000.0,
            qubit_cost: 1000.0,
            bell_pair_cost: 450.0,
            on_demand_cost: 25000.0,
        }
    }
}

impl CostParams {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            reserve_cost: self.reserve_cost * factor,
            qubit_cost: self.qubit_cost * factor,
            bell_pair_cost: self.bell_pair_cost * factor,
            on_demand_cost: self.on_demand_cost * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MachineSpec {
    pub id: String,
    pub capacity_qubits: u64,
}

/// Teleportation link from a non-hub machine to the hub.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinkSpec {
    pub machine_id: String,
    /// Maximum Bell pairs per scenario on this link.
    pub bell_capacity: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OnDemandSpec {
    pub capacity_qubits: u64,
    pub max_units: u64,
}

impl OnDemandSpec {
    /// Enough units to cover the largest demand on their own, plus one.
    pub fn default_max_units(capacity_qubits: u64, max_demand: u64) -> u64 {
        if capacity_qubits == 0 {
            return 1;
        }
        max_demand.div_ceil(capacity_qubits) + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Instance {
    pub machines: Vec<MachineSpec>,
    pub hub_id: String,
    pub links: Vec<LinkSpec>,
    pub costs: CostParams,
    pub on_demand: OnDemandSpec,
}

impl Instance {
    /// Ten identical 257-qubit machines, `qc0` as hub, default prices, and
    /// 127-qubit on-demand units sized for a demand of 10.
    pub fn case_study() -> Self {
        let machines: Vec<MachineSpec> = (0..DEFAULT_MACHINE_COUNT)
            .map(|i| MachineSpec {
                id: format!("qc{i}"),
                capacity_qubits: DEFAULT_MACHINE_CAPACITY,
            })
            .collect();
        Self::star(machines, 0, CostParams::default(), DEFAULT_ON_DEMAND_CAPACITY, 10)
    }

    /// Builds an instance where every non-hub machine links to the hub with
    /// a Bell capacity equal to its qubit capacity.
    pub fn star(
        machines: Vec<MachineSpec>,
        hub: usize,
        costs: CostParams,
        on_demand_capacity: u64,
        max_demand: u64,
    ) -> Self {
        let hub_id = machines[hub].id.clone();
        let links = machines
            .iter()
            .filter(|m| m.id != hub_id)
            .map(|m| LinkSpec {
                machine_id: m.id.clone(),
                bell_capacity: m.capacity_qubits,
            })
            .collect();
        Self {
            machines,
            hub_id,
            links,
            costs,
            on_demand: OnDemandSpec {
                capacity_qubits: on_demand_capacity,
                max_units: OnDemandSpec::default_max_units(on_demand_capacity, max_demand),
            },
        }
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn machine_index(&self, id: &str) -> Option<usize> {
        self.machines.iter().position(|m| m.id == id)
    }

    pub fn hub_index(&self) -> Option<usize> {
        self.machine_index(&self.hub_id)
    }

    /// Bell capacity of the link leaving machine `index`; `None` for the hub
    /// or a machine without a link.
    pub fn bell_capacity(&self, index: usize) -> Option<u64> {
        let id = &self.machines[index].id;
        self.links
            .iter()
            .find(|l| &l.machine_id == id)
            .map(|l| l.bell_capacity)
    }

    /// Machine indices for a set of ids. Unknown ids are a structure error.
    pub fn indices_of<'a, I>(&self, ids: I) -> Result<Vec<usize>>
    where
        I: IntoIterator<Item = &'a String>,
    {
        ids.into_iter()
            .map(|id| {
                self.machine_index(id)
                    .ok_or_else(|| Error::StructureMismatch(format!("unknown machine id '{id}'")))
            })
            .collect()
    }

    pub fn with_costs(&self, costs: CostParams) -> Self {
        Self {
            costs,
            ..self.clone()
        }
    }
}

/// Second-stage decisions for one scenario. Machines missing from the maps
/// use zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Recourse {
    pub on_demand_units: u64,
    pub qubits_used: BTreeMap<String, u64>,
    pub qubits_on_demand: u64,
    pub bell_pairs: BTreeMap<String, u64>,
}

impl Recourse {
    /// Builds a recourse from per-machine vectors, keeping nonzero entries.
    /// `bell_pairs` is indexed like `ids`; the hub's entry is ignored.
    pub fn from_dense(
        ids: &[String],
        hub: usize,
        on_demand_units: u64,
        qubits: &[u64],
        qubits_on_demand: u64,
        bell_pairs: &[u64],
    ) -> Self {
        let nonzero = |vals: &[u64], skip: Option<usize>| -> BTreeMap<String, u64> {
            ids.iter()
                .zip(vals)
                .enumerate()
                .filter(|&(i, (_, &v))| v > 0 && Some(i) != skip)
                .map(|(_, (id, &v))| (id.clone(), v))
                .collect()
        };
        Self {
            on_demand_units,
            qubits_used: nonzero(qubits, None),
            qubits_on_demand,
            bell_pairs: nonzero(bell_pairs, Some(hub)),
        }
    }

    pub fn total_qubits(&self) -> u64 {
        self.qubits_used.values().sum::<u64>() + self.qubits_on_demand
    }

    pub fn total_bell_pairs(&self) -> u64 {
        self.bell_pairs.values().sum()
    }

    /// Unweighted second-stage cost of this recourse.
    pub fn cost(&self, costs: &CostParams) -> f64 {
        costs.on_demand_cost * self.on_demand_units as f64
            + costs.qubit_cost * self.total_qubits() as f64
            + costs.bell_pair_cost * self.total_bell_pairs() as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plan {
    pub reserved: BTreeSet<String>,
    /// One entry per scenario, in scenario order.
    pub recourse: Vec<Recourse>,
    pub objective: f64,
}

impl Plan {
    /// No reservations and all-zero recourse.
    pub fn empty(scenario_count: usize) -> Self {
        Self {
            reserved: BTreeSet::new(),
            recourse: alloc::vec![Recourse::default(); scenario_count],
            objective: 0.0,
        }
    }

    pub fn on_demand_used(&self) -> bool {
        self.recourse.iter().any(|r| r.on_demand_units > 0)
    }

    /// Checks the plan invariants: reservations and recourse keys refer to
    /// known machines, unreserved machines stay idle, on-demand units stay
    /// within the cap, and every remote qubit has exactly one Bell pair.
    /// Demand coverage is not checked here.
    pub fn check(&self, instance: &Instance, scenarios: &ScenarioSet) -> Result<()> {
        check_structure(instance, scenarios, self)?;
        let hub = &instance.hub_id;
        for (w, rec) in self.recourse.iter().enumerate() {
            if rec.on_demand_units > instance.on_demand.max_units {
                return Err(Error::StructureMismatch(format!(
                    "scenario {w}: {} on-demand units exceed cap {}",
                    rec.on_demand_units, instance.on_demand.max_units
                )));
            }
            for (id, &q) in &rec.qubits_used {
                if q > 0 && !self.reserved.contains(id) {
                    return Err(Error::StructureMismatch(format!(
                        "scenario {w}: machine '{id}' uses {q} qubits but is not reserved"
                    )));
                }
            }
            for m in &instance.machines {
                if &m.id == hub {
                    continue;
                }
                let q = rec.qubits_used.get(&m.id).copied().unwrap_or(0);
                let b = rec.bell_pairs.get(&m.id).copied().unwrap_or(0);
                if q != b {
                    return Err(Error::StructureMismatch(format!(
                        "scenario {w}: machine '{}' uses {q} qubits but {b} Bell pairs",
                        m.id
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_structure(instance: &Instance, scenarios: &ScenarioSet, plan: &Plan) -> Result<()> {
    if plan.recourse.len() != scenarios.len() {
        return Err(Error::StructureMismatch(format!(
            "plan has {} recourse entries for {} scenarios",
            plan.recourse.len(),
            scenarios.len()
        )));
    }
    instance.indices_of(&plan.reserved)?;
    for rec in &plan.recourse {
        instance.indices_of(rec.qubits_used.keys())?;
        for id in rec.bell_pairs.keys() {
            if *id == instance.hub_id {
                return Err(Error::StructureMismatch(format!(
                    "hub '{id}' cannot consume Bell pairs"
                )));
            }
        }
        instance.indices_of(rec.bell_pairs.keys())?;
    }
    Ok(())
}

/// Recomputes the expected total cost of a plan:
/// reservations plus the probability-weighted on-demand, qubit and Bell-pair
/// charges of every scenario.
pub fn cost_of_plan(instance: &Instance, scenarios: &ScenarioSet, plan: &Plan) -> Result<f64> {
    check_structure(instance, scenarios, plan)?;
    let costs = &instance.costs;
    let first_stage = costs.reserve_cost * plan.reserved.len() as f64;
    let second_stage: f64 = scenarios
        .iter()
        .zip(&plan.recourse)
        .map(|(s, rec)| s.probability * rec.cost(costs))
        .sum();
    Ok(first_stage + second_stage)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Location of the offending value, e.g. `machines[3].id`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::ValidationFailed(self))
        }
    }

    pub fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.message.contains(needle) || v.path.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Short decimal rendering for diagnostics (`1.1` rather than
/// `1.1000000000000001`).
pub(crate) fn short_num(value: f64) -> String {
    let s = format!("{value:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Lists every problem with an instance and scenario set. An empty report
/// means the pair can be formulated and solved.
pub fn validate_instance(instance: &Instance, scenarios: &ScenarioSet) -> ValidationReport {
    let mut report = ValidationReport::default();

    if instance.machines.is_empty() {
        report.push("machines", "at least one machine is required");
    }
    let mut seen = BTreeSet::new();
    for (i, m) in instance.machines.iter().enumerate() {
        if !seen.insert(m.id.as_str()) {
            report.push(
                format!("machines[{i}].id"),
                format!("duplicate machine id '{}'", m.id),
            );
        }
    }
    let hub_known = seen.contains(instance.hub_id.as_str());
    if !instance.machines.is_empty() && !hub_known {
        report.push(
            "hub_id",
            format!("hub '{}' is not a machine", instance.hub_id),
        );
    }

    let mut linked = BTreeSet::new();
    for (i, link) in instance.links.iter().enumerate() {
        let path = format!("links[{i}].machine_id");
        if link.machine_id == instance.hub_id {
            report.push(path, format!("hub '{}' must not have a link", link.machine_id));
        } else if !seen.contains(link.machine_id.as_str()) {
            report.push(path, format!("link to unknown machine '{}'", link.machine_id));
        } else if !linked.insert(link.machine_id.as_str()) {
            report.push(path, format!("duplicate link for machine '{}'", link.machine_id));
        }
    }
    for m in &instance.machines {
        if m.id != instance.hub_id && !linked.contains(m.id.as_str()) {
            report.push("links", format!("missing link for machine '{}'", m.id));
        }
    }

    let c = &instance.costs;
    for (name, value) in [
        ("reserve", c.reserve_cost),
        ("per_qubit", c.qubit_cost),
        ("per_bell_pair", c.bell_pair_cost),
        ("on_demand_deploy", c.on_demand_cost),
    ] {
        if !value.is_finite() || value < 0.0 {
            report.push(
                format!("costs.{name}"),
                format!("cost must be finite and nonnegative, got {value}"),
            );
        }
    }

    if scenarios.is_empty() {
        report.push("scenarios", "at least one scenario is required");
    }
    let mut total = 0.0;
    for (w, s) in scenarios.iter().enumerate() {
        total += s.probability;
        if !(0.0..=1.0).contains(&s.probability) {
            report.push(
                format!("scenarios[{w}].probability"),
                format!("probability {} outside [0, 1]", s.probability),
            );
        }
        if !(0.0..=1.0).contains(&s.fidelity) {
            report.push(
                format!("scenarios[{w}].fidelity"),
                format!("fidelity {} outside [0, 1]", s.fidelity),
            );
        }
        if s.availability.len() != instance.machines.len() {
            report.push(
                format!("scenarios[{w}].availability"),
                format!(
                    "availability has {} entries for {} machines",
                    s.availability.len(),
                    instance.machines.len()
                ),
            );
        }
    }
    if !scenarios.is_empty() && !((total - 1.0).abs() <= PROBABILITY_SUM_TOL) {
        report.push(
            "scenarios",
            format!("probabilities sum to {} ≠ 1", short_num(total)),
        );
    }

    report
}
