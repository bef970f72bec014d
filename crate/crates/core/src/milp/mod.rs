//! Mixed-integer linear programs and a self-contained solver: a dense
//! bounded-variable two-phase simplex with Bland's rule, driven by
//! best-bound branch-and-bound.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};

mod branch;
mod simplex;
mod verify;

pub use branch::solve_milp;
pub use simplex::solve_lp;
pub use verify::{verify_solution, VerifyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub objective: f64,
}

/// Sparse row `Σ coef·x[index] (relation) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization MILP. `tiebreaks` are secondary objectives applied
/// lexicographically among optima of the primary objective when the solver
/// runs with [`TiebreakMode::Lexicographic`].
///
/// `branch_first` lists linking variables (first-stage decisions). The
/// search fixes them before anything else; once they are fixed the rest of
/// the model usually falls apart into independent blocks that are solved
/// one at a time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub tiebreaks: Vec<Vec<(usize, f64)>>,
    pub branch_first: Vec<usize>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
        objective: f64,
    ) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
            objective,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            terms,
            relation,
            rhs,
        });
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    /// Copy with every objective coefficient multiplied by `factor`.
    pub fn scaled_objective(&self, factor: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.objective *= factor;
        }
        m
    }

    /// Structural checks: indices in range, finite data, `lower <= upper`,
    /// finite lower bounds.
    pub fn check(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if !v.lower.is_finite() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::BadArgument(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if !v.objective.is_finite() {
                return Err(Error::BadArgument(format!(
                    "variable {} has objective {}",
                    v.name, v.objective
                )));
            }
        }
        let rows = self.constraints.iter().map(|c| (&c.terms, c.rhs));
        let ties = self.tiebreaks.iter().map(|t| (t, 0.0));
        if let Some(&j) = self.branch_first.iter().find(|&&j| j >= n || !self.variables[j].integer) {
            return Err(Error::BadArgument(format!(
                "branch_first entry {j} is not an integer variable"
            )));
        }
        for (i, (terms, rhs)) in rows.chain(ties).enumerate() {
            if !rhs.is_finite() {
                return Err(Error::BadArgument(format!("row {i} has rhs {rhs}")));
            }
            for &(j, a) in terms {
                if j >= n || !a.is_finite() {
                    return Err(Error::BadArgument(format!(
                        "row {i} references variable {j} with coefficient {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// CPLEX-style LP text for cross-checking with external solvers.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let name = |j: usize| self.variables[j].name.as_str();
        let term = |out: &mut String, first: bool, a: f64, j: usize| {
            if a < 0.0 {
                out.push_str(" -");
            } else if !first {
                out.push_str(" +");
            }
            if a.abs() != 1.0 {
                let _ = write!(out, " {}", lp_num(a.abs()));
            }
            let _ = write!(out, " {}", name(j));
        };

        out.push_str("Minimize\n obj:");
        let mut first = true;
        for (j, v) in self.variables.iter().enumerate() {
            if v.objective != 0.0 {
                term(&mut out, first, v.objective, j);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            if c.terms.is_empty() {
                out.push_str(" 0");
            }
            for (k, &(j, a)) in c.terms.iter().enumerate() {
                term(&mut out, k == 0, a, j);
            }
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {rel} {}", lp_num(c.rhs));
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            if v.upper.is_finite() {
                let _ = writeln!(out, " {} <= {} <= {}", lp_num(v.lower), v.name, lp_num(v.upper));
            } else {
                let _ = writeln!(out, " {} >= {}", v.name, lp_num(v.lower));
            }
        }
        let ints: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.integer)
            .map(|v| v.name.as_str())
            .collect();
        if !ints.is_empty() {
            out.push_str("Generals\n");
            for chunk in ints.chunks(8) {
                out.push(' ');
                out.push_str(&chunk.join(" "));
                out.push('\n');
            }
        }
        out.push_str("End\n");
        out
    }
}

fn lp_num(x: f64) -> String {
    if x == libm::trunc(x) && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; meaningful only when `Optimal`.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Structural variables in the final basis.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MilpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Branch-and-bound nodes solved beyond the root, over all stages.
    pub nodes: usize,
}

impl MilpSolution {
    pub fn infeasible(nodes: usize) -> Self {
        Self {
            status: MilpStatus::Infeasible,
            values: Vec::new(),
            objective: f64::INFINITY,
            nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiebreakMode {
    /// Return whichever optimum the search reaches first.
    None,
    /// Resolve ties with the model's secondary objectives, in order. For the
    /// allocation model that means fewer reservations, then more on-demand.
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub integrality_tol: f64,
    pub feasibility_tol: f64,
    /// Absolute optimality gap; also the tie window between objectives.
    pub gap_tol: f64,
    /// `None` means `10 * (rows + cols)` of the model.
    pub max_simplex_iterations: Option<usize>,
    pub max_nodes: usize,
    pub tiebreak: TiebreakMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            integrality_tol: 1e-6,
            feasibility_tol: 1e-9,
            gap_tol: 1e-6,
            max_simplex_iterations: None,
            max_nodes: 1_000_000,
            tiebreak: TiebreakMode::Lexicographic,
        }
    }
}

impl SolveOptions {
    pub fn check(&self) -> Result<()> {
        let tols = [self.integrality_tol, self.feasibility_tol, self.gap_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::BadArgument("tolerances must be positive".into()));
        }
        if self.max_nodes == 0 || self.max_simplex_iterations == Some(0) {
            return Err(Error::BadArgument("limits must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn iteration_limit(&self, model: &MilpModel) -> usize {
        self.max_simplex_iterations
            .unwrap_or(10 * (model.num_constraints() + model.num_variables()))
    }
}
