//! JSON instance files.
//!
//! Every top-level field is optional and defaults to the case-study values:
//! ten 257-qubit machines `qc0..qc9`, the first machine as hub, one link per
//! remote machine with Bell capacity equal to its qubit capacity, prices
//! 5000/1000/450/25000 and 127-qubit on-demand units. Scenarios may be
//! embedded under `"scenarios"`.

use std::collections::BTreeMap;
use std::path::Path;

use qnet_alloc_core::model::{
    DEFAULT_MACHINE_CAPACITY, DEFAULT_MACHINE_COUNT, DEFAULT_ON_DEMAND_CAPACITY,
};
use qnet_alloc_core::scenario::make_paper_scenarios;
use qnet_alloc_core::{
    validate_instance, CostParams, Instance, LinkSpec, MachineSpec, OnDemandSpec, Scenario,
    ScenarioSet, ValidationReport,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ParseError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machines: Option<Vec<MachineEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hub_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<Vec<LinkEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<CostsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_demand: Option<OnDemandEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<ScenarioEntry>>,
}

// Integers are read as i64 so that negative values reach validation with a
// field path instead of failing as a type error.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_qubits: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub machine_id: String,
    pub bell_capacity: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_qubit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_bell_pair: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_demand_deploy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnDemandEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_qubits: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_units: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub probability: f64,
    pub demand_qubits: i64,
    pub availability: BTreeMap<String, i64>,
    pub fidelity: f64,
}

/// A validated instance file. `max_units` is resolved only once the
/// scenario set is known, unless the file fixes it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInstance {
    pub instance: Instance,
    pub scenarios: Option<ScenarioSet>,
    pub max_units_given: bool,
}

impl LoadedInstance {
    /// Instance and scenarios to solve: `p1` regenerates the two-scenario
    /// case study and wins over embedded scenarios; without either the case
    /// study at p1 = 0.8 is used.
    pub fn resolve(&self, p1: Option<f64>) -> Result<(Instance, ScenarioSet), CliError> {
        let scenarios = match (p1, &self.scenarios) {
            (Some(p1), _) => make_paper_scenarios(p1, self.instance.machine_count())?,
            (None, Some(set)) => set.clone(),
            (None, None) => make_paper_scenarios(0.8, self.instance.machine_count())?,
        };
        Ok((self.instance_for(&scenarios), scenarios))
    }

    /// The instance with `max_units` defaulted for `scenarios`.
    pub fn instance_for(&self, scenarios: &ScenarioSet) -> Instance {
        let mut instance = self.instance.clone();
        if !self.max_units_given {
            instance.on_demand.max_units = OnDemandSpec::default_max_units(
                instance.on_demand.capacity_qubits,
                scenarios.max_demand(),
            );
        }
        instance
    }
}

pub fn load_instance(path: &Path) -> Result<LoadedInstance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text).map_err(|e| e.in_file(path))
}

/// Parses and validates instance JSON.
pub fn parse_instance(text: &str) -> Result<LoadedInstance, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| CliError::Parse(ParseError::new(text, e)))?;
    de.end()
        .map_err(|e| CliError::Parse(ParseError::from_json(text, e, String::new())))?;
    file.into_loaded()
}

impl InstanceFile {
    pub fn into_loaded(self) -> Result<LoadedInstance, CliError> {
        let mut report = ValidationReport::default();

        let machines: Vec<MachineSpec> = match &self.machines {
            None => (0..DEFAULT_MACHINE_COUNT)
                .map(|i| MachineSpec {
                    id: format!("qc{i}"),
                    capacity_qubits: DEFAULT_MACHINE_CAPACITY,
                })
                .collect(),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, m)| MachineSpec {
                    id: m.id.clone(),
                    capacity_qubits: m.capacity_qubits.map_or(DEFAULT_MACHINE_CAPACITY, |c| {
                        count(&mut report, format!("machines[{i}].capacity_qubits"), c)
                    }),
                })
                .collect(),
        };
        let hub_id = self
            .hub_id
            .clone()
            .or_else(|| machines.first().map(|m| m.id.clone()))
            .unwrap_or_default();
        let links: Vec<LinkSpec> = match &self.links {
            None => machines
                .iter()
                .filter(|m| m.id != hub_id)
                .map(|m| LinkSpec {
                    machine_id: m.id.clone(),
                    bell_capacity: m.capacity_qubits,
                })
                .collect(),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, l)| LinkSpec {
                    machine_id: l.machine_id.clone(),
                    bell_capacity: count(&mut report, format!("links[{i}].bell_capacity"), l.bell_capacity),
                })
                .collect(),
        };
        let c = self.costs.clone().unwrap_or_default();
        let d = CostParams::default();
        let costs = CostParams {
            reserve_cost: c.reserve.unwrap_or(d.reserve_cost),
            qubit_cost: c.per_qubit.unwrap_or(d.qubit_cost),
            bell_pair_cost: c.per_bell_pair.unwrap_or(d.bell_pair_cost),
            on_demand_cost: c.on_demand_deploy.unwrap_or(d.on_demand_cost),
        };
        let od = self.on_demand.clone().unwrap_or_default();
        let od_capacity = od.capacity_qubits.map_or(DEFAULT_ON_DEMAND_CAPACITY, |v| {
            count(&mut report, "on_demand.capacity_qubits".into(), v)
        });
        let max_units = od.max_units.map(|v| count(&mut report, "on_demand.max_units".into(), v));

        let scenarios = self.scenarios.as_ref().map(|list| {
            ScenarioSet::new(
                list.iter()
                    .enumerate()
                    .map(|(w, s)| {
                        let mut availability = vec![0; machines.len()];
                        for (id, &a) in &s.availability {
                            let path = format!("scenarios[{w}].availability.{id}");
                            match machines.iter().position(|m| &m.id == id) {
                                Some(i) => availability[i] = count(&mut report, path, a),
                                None => report.push(path, format!("unknown machine '{id}'")),
                            }
                        }
                        for m in machines.iter().filter(|m| !s.availability.contains_key(&m.id)) {
                            report.push(
                                format!("scenarios[{w}].availability"),
                                format!("missing machine '{}'", m.id),
                            );
                        }
                        Scenario {
                            probability: s.probability,
                            demand_qubits: count(&mut report, format!("scenarios[{w}].demand_qubits"), s.demand_qubits),
                            availability,
                            fidelity: s.fidelity,
                        }
                    })
                    .collect(),
            )
        });

        let mut instance = Instance {
            machines,
            hub_id,
            links,
            costs,
            on_demand: OnDemandSpec {
                capacity_qubits: od_capacity,
                max_units: max_units.unwrap_or(0),
            },
        };
        let check_set = match &scenarios {
            Some(set) => set.clone(),
            None => make_paper_scenarios(0.8, instance.machine_count())
                .expect("0.8 is a probability"),
        };
        if max_units.is_none() {
            instance.on_demand.max_units =
                OnDemandSpec::default_max_units(od_capacity, check_set.max_demand());
        }
        for v in validate_instance(&instance, &check_set).violations {
            report.violations.push(v);
        }
        if !report.is_empty() {
            return Err(CliError::Validation {
                path: None,
                report,
            });
        }
        Ok(LoadedInstance {
            instance,
            scenarios,
            max_units_given: max_units.is_some(),
        })
    }

    /// File form of an in-memory instance, with every field spelled out.
    pub fn from_instance(instance: &Instance, scenarios: Option<&ScenarioSet>) -> Self {
        Self {
            machines: Some(
                instance
                    .machines
                    .iter()
                    .map(|m| MachineEntry {
                        id: m.id.clone(),
                        capacity_qubits: Some(m.capacity_qubits as i64),
                    })
                    .collect(),
            ),
            hub_id: Some(instance.hub_id.clone()),
            links: Some(
                instance
                    .links
                    .iter()
                    .map(|l| LinkEntry {
                        machine_id: l.machine_id.clone(),
                        bell_capacity: l.bell_capacity as i64,
                    })
                    .collect(),
            ),
            costs: Some(CostsEntry {
                reserve: Some(instance.costs.reserve_cost),
                per_qubit: Some(instance.costs.qubit_cost),
                per_bell_pair: Some(instance.costs.bell_pair_cost),
                on_demand_deploy: Some(instance.costs.on_demand_cost),
            }),
            on_demand: Some(OnDemandEntry {
                capacity_qubits: Some(instance.on_demand.capacity_qubits as i64),
                max_units: Some(instance.on_demand.max_units as i64),
            }),
            scenarios: scenarios.map(|set| {
                set.iter()
                    .map(|s| ScenarioEntry {
                        probability: s.probability,
                        demand_qubits: s.demand_qubits as i64,
                        availability: instance
                            .machines
                            .iter()
                            .zip(&s.availability)
                            .map(|(m, &a)| (m.id.clone(), a as i64))
                            .collect(),
                        fidelity: s.fidelity,
                    })
                    .collect()
            }),
        }
    }
}

fn count(report: &mut ValidationReport, path: String, value: i64) -> u64 {
    u64::try_from(value).unwrap_or_else(|_| {
        report.push(path, format!("must be a nonnegative integer, got {value}"));
        0
    })
}
