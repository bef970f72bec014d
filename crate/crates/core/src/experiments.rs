//! Probability sweep (cost breakdown) and on-demand price sweep (proposed
//! vs. EVF vs. random). Pure computation; writers live in the std crate.

use alloc::vec::Vec;

use crate::baselines::{solve_evf, solve_random, RandomSelection};
use crate::error::{Error, Result};
use crate::formulation::solve_plan;
use crate::milp::SolveOptions;
use crate::model::{Instance, Plan};
use crate::scenario::{make_paper_scenarios, ScenarioSet};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub p1: f64,
    pub reservation_cost: f64,
    pub expected_on_demand_cost: f64,
    pub expected_qubit_cost: f64,
    pub expected_bell_cost: f64,
    pub total: f64,
    pub reserved_count: usize,
    pub on_demand_used: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompareRow {
    pub on_demand_cost: f64,
    pub proposed_total: f64,
    pub evf_total: f64,
    pub random_mean: f64,
}

/// A sweep point that failed; the sweep carries on past it.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// Grid value of the failed point.
    pub at: f64,
    pub error: Error,
}

/// Splits a plan's objective into reservation, on-demand, qubit and
/// Bell-pair components.
pub fn decompose(instance: &Instance, scenarios: &ScenarioSet, plan: &Plan, p1: f64) -> SweepRow {
    let c = &instance.costs;
    let reservation_cost = c.reserve_cost * plan.reserved.len() as f64;
    let (mut od, mut qubits, mut bells) = (0.0, 0.0, 0.0);
    for (s, r) in scenarios.iter().zip(&plan.recourse) {
        od += s.probability * c.on_demand_cost * r.on_demand_units as f64;
        qubits += s.probability * c.qubit_cost * r.total_qubits() as f64;
        bells += s.probability * c.bell_pair_cost * r.total_bell_pairs() as f64;
    }
    SweepRow {
        p1,
        reservation_cost,
        expected_on_demand_cost: od,
        expected_qubit_cost: qubits,
        expected_bell_cost: bells,
        total: reservation_cost + od + qubits + bells,
        reserved_count: plan.reserved.len(),
        on_demand_used: plan.on_demand_used(),
    }
}

/// Evenly spaced values from `from` to `to` inclusive, rounded to 1e-9 so
/// that e.g. the fourth step of 0.05 is exactly `0.2`.
pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(Error::BadArgument(alloc::format!(
            "bad grid from {from} to {to} step {step}"
        )));
    }
    let count = libm::floor((to - from) / step + 1e-9) as usize;
    Ok((0..=count)
        .map(|k| libm::round((from + k as f64 * step) * 1e9) / 1e9)
        .collect())
}

/// Solves the two-scenario case study for every `p1` in `grid`, rows in
/// ascending `p1`.
pub fn run_probability_sweep(
    instance: &Instance,
    grid: &[f64],
    options: &SolveOptions,
) -> Vec<core::result::Result<SweepRow, RowError>> {
    let mut points = grid.to_vec();
    points.sort_by(f64::total_cmp);
    points
        .into_iter()
        .map(|p1| {
            let row = || -> Result<SweepRow> {
                let scenarios = make_paper_scenarios(p1, instance.machine_count())?;
                let (plan, _, _) = solve_plan(instance, &scenarios, options)?;
                Ok(decompose(instance, &scenarios, &plan, p1))
            };
            row().map_err(|error| RowError { at: p1, error })
        })
        .collect()
}

/// Settings for [`run_cost_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSweepConfig {
    pub p1: f64,
    pub trials: usize,
    pub seed: u64,
    pub selection: RandomSelection,
}

/// Proposed, EVF and random-mean totals for every on-demand price in
/// `od_costs`, rows in ascending price.
pub fn run_cost_sweep(
    instance: &Instance,
    od_costs: &[f64],
    config: &CostSweepConfig,
    options: &SolveOptions,
) -> Result<Vec<core::result::Result<CompareRow, RowError>>> {
    if od_costs.is_empty() {
        return Err(Error::BadArgument("on-demand cost list is empty".into()));
    }
    if let Some(bad) = od_costs.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(Error::BadArgument(alloc::format!(
            "on-demand cost {bad} is not positive"
        )));
    }
    let scenarios = make_paper_scenarios(config.p1, instance.machine_count())?;
    let mut prices = od_costs.to_vec();
    prices.sort_by(f64::total_cmp);
    Ok(prices
        .into_iter()
        .map(|price| {
            let row = || -> Result<CompareRow> {
                let mut costs = instance.costs;
                costs.on_demand_cost = price;
                let inst = instance.with_costs(costs);
                let (plan, _, _) = solve_plan(&inst, &scenarios, options)?;
                let evf = solve_evf(&inst, &scenarios, options)?;
                let random = solve_random(
                    &inst,
                    &scenarios,
                    config.trials,
                    config.seed,
                    config.selection,
                )?;
                Ok(CompareRow {
                    on_demand_cost: price,
                    proposed_total: plan.objective,
                    evf_total: evf.expected_cost,
                    random_mean: random.expected_cost,
                })
            };
            row().map_err(|error| RowError { at: price, error })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_round_values() {
        let g = grid(0.0, 1.0, 0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[4], 0.2);
        assert_eq!(g[20], 1.0);
        assert_eq!(grid(5000.0, 45000.0, 5000.0).unwrap().len(), 9);
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sweep_rows_at_key_points() {
        let inst = Instance::case_study();
        let rows = run_probability_sweep(&inst, &[0.8, 0.0], &SolveOptions::default());
        let zero = rows[0].as_ref().unwrap();
        assert_eq!(zero.p1, 0.0);
        assert_eq!(zero.total, 0.0);
        assert_eq!(zero.reservation_cost, 0.0);
        assert_eq!(zero.expected_qubit_cost, 0.0);

        let r = rows[1].as_ref().unwrap();
        assert!((r.reservation_cost - 5000.0).abs() < 1e-6);
        assert!((r.expected_qubit_cost - 8000.0).abs() < 1e-6);
        assert_eq!(r.expected_on_demand_cost, 0.0);
        assert_eq!(r.expected_bell_cost, 0.0);
        assert!((r.total - 13000.0).abs() < 1e-6);
        assert!(!r.on_demand_used);
    }

    #[test]
    fn bad_points_become_row_errors() {
        let inst = Instance::case_study();
        let rows = run_probability_sweep(&inst, &[0.5, 1.5], &SolveOptions::default());
        assert!(rows[0].is_ok());
        assert_eq!(rows[1].as_ref().unwrap_err().error, Error::BadProbability(1.5));
    }

    #[test]
    fn cost_sweep_rejects_bad_prices() {
        let inst = Instance::case_study();
        let cfg = CostSweepConfig {
            p1: 0.8,
            trials: 4,
            seed: 1,
            selection: RandomSelection::Bernoulli,
        };
        let o = SolveOptions::default();
        assert!(run_cost_sweep(&inst, &[], &cfg, &o).is_err());
        assert!(run_cost_sweep(&inst, &[100.0, -1.0], &cfg, &o).is_err());
    }
}
