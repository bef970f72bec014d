//! Probability-weighted realizations of demand, availability and fidelity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, RangeInclusive};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub probability: f64,
    /// Effective qubits the task needs at the hub.
    pub demand_qubits: u64,
    /// Usable qubits per machine, aligned with `Instance::machines`.
    pub availability: Vec<u64>,
    /// Efficiency of a teleported qubit, in `[0, 1]`.
    pub fidelity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Self {
        Self { scenarios }
    }

    pub fn single(mut scenario: Scenario) -> Self {
        scenario.probability = 1.0;
        Self::new(vec![scenario])
    }

    pub fn max_demand(&self) -> u64 {
        self.scenarios
            .iter()
            .map(|s| s.demand_qubits)
            .max()
            .unwrap_or(0)
    }

    pub fn total_probability(&self) -> f64 {
        self.scenarios.iter().map(|s| s.probability).sum()
    }
}

impl Deref for ScenarioSet {
    type Target = [Scenario];

    fn deref(&self) -> &[Scenario] {
        &self.scenarios
    }
}

/// The two-scenario case study: with probability `p1` a 10-qubit task
/// arrives while every machine offers 127 qubits over perfect links;
/// otherwise nothing is demanded, nothing is available and fidelity is 0.
pub fn make_paper_scenarios(p1: f64, machine_count: usize) -> Result<ScenarioSet> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::BadProbability(p1));
    }
    Ok(ScenarioSet::new(vec![
        Scenario {
            probability: p1,
            demand_qubits: 10,
            availability: vec![127; machine_count],
            fidelity: 1.0,
        },
        Scenario {
            probability: 1.0 - p1,
            demand_qubits: 0,
            availability: vec![0; machine_count],
            fidelity: 0.0,
        },
    ]))
}

fn round_half_up(value: f64) -> u64 {
    // The epsilon absorbs representation error in sums such as 0.5 * 127.
    libm::floor(value + 0.5 + 1e-9).max(0.0) as u64
}

/// Probability-weighted mean scenario. Integer quantities round half-up;
/// fidelity stays fractional.
pub fn average_scenario(scenarios: &ScenarioSet) -> Scenario {
    let machines = scenarios
        .iter()
        .map(|s| s.availability.len())
        .max()
        .unwrap_or(0);
    let mut demand = 0.0;
    let mut fidelity = 0.0;
    let mut availability = vec![0.0; machines];
    for s in scenarios.iter() {
        demand += s.probability * s.demand_qubits as f64;
        fidelity += s.probability * s.fidelity;
        for (acc, &a) in availability.iter_mut().zip(&s.availability) {
            *acc += s.probability * a as f64;
        }
    }
    Scenario {
        probability: 1.0,
        demand_qubits: round_half_up(demand),
        availability: availability.into_iter().map(round_half_up).collect(),
        fidelity: fidelity.clamp(0.0, 1.0),
    }
}

/// Inclusive uniform ranges for sampled scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBounds {
    pub demand: RangeInclusive<u64>,
    pub availability: RangeInclusive<u64>,
    pub fidelity: RangeInclusive<f64>,
}

impl SampleBounds {
    fn check(&self) -> Result<()> {
        if self.demand.is_empty() {
            return Err(Error::BadBounds(format!("empty demand range {:?}", self.demand)));
        }
        if self.availability.is_empty() {
            return Err(Error::BadBounds(format!(
                "empty availability range {:?}",
                self.availability
            )));
        }
        let (lo, hi) = (*self.fidelity.start(), *self.fidelity.end());
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::BadBounds(format!(
                "fidelity range [{lo}, {hi}] not within [0, 1]"
            )));
        }
        Ok(())
    }
}

/// `n` equally likely scenarios drawn independently and uniformly within
/// `bounds`. The output depends only on the arguments.
pub fn sample_scenarios(
    bounds: &SampleBounds,
    machine_count: usize,
    n: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if n == 0 {
        return Err(Error::BadBounds("scenario count must be at least 1".into()));
    }
    bounds.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probability = 1.0 / n as f64;
    let scenarios = (0..n)
        .map(|_| {
            let demand_qubits = rng.random_range(bounds.demand.clone());
            let availability = (0..machine_count)
                .map(|_| rng.random_range(bounds.availability.clone()))
                .collect();
            let fidelity = rng.random_range(bounds.fidelity.clone());
            Scenario {
                probability,
                demand_qubits,
                availability,
                fidelity,
            }
        })
        .collect();
    Ok(ScenarioSet::new(scenarios))
}
