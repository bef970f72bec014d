use alloc::vec;
use alloc::vec::Vec;

use super::{Constraint, LpSolution, LpStatus, MilpModel, Relation, SolveOptions};

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;

/// Solves the continuous relaxation of `model` (integrality is ignored).
pub fn solve_lp(model: &MilpModel, options: &SolveOptions) -> LpSolution {
    let objective: Vec<f64> = model.variables.iter().map(|v| v.objective).collect();
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let problem = LpProblem {
        objective: &objective,
        lower: &lower,
        upper: &upper,
        rows: &model.constraints,
        extra_rows: &[],
    };
    problem.solve(options.iteration_limit(model), options.feasibility_tol)
}

/// An LP over the model's variables with per-node bounds, an arbitrary
/// objective, and optional extra rows.
pub(crate) struct LpProblem<'a> {
    pub objective: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub rows: &'a [Constraint],
    pub extra_rows: &'a [Constraint],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
}

enum Outcome {
    Optimal,
    Unbounded,
    Limit,
}

/// Dense tableau over shifted variables `x' = x - lower`, so every column
/// lives in `[0, upper']`. Nonbasic columns sit at one of their bounds and
/// `beta` holds the current values of the basic columns.
struct Tableau {
    m: usize,
    cols: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    first_artificial: usize,
    /// Row of each artificial column, by offset from `first_artificial`.
    artificial_row: Vec<usize>,
    cost_tol: f64,
}

impl LpProblem<'_> {
    pub fn solve(&self, iteration_limit: usize, feasibility_tol: f64) -> LpSolution {
        let n = self.objective.len();
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return infeasible(0);
            }
        }
        let rows: Vec<&Constraint> = self.rows.iter().chain(self.extra_rows).collect();
        let mut t = Tableau::build(self, &rows);
        let mut budget = iteration_limit;

        // Phase 1: minimize the sum of artificials.
        if t.first_artificial < t.cols {
            let mut cost = vec![0.0; t.cols];
            cost[t.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            t.set_cost(cost);
            match t.run(&mut budget) {
                Outcome::Optimal => {}
                Outcome::Limit => return limit(iteration_limit - budget),
                // The phase-1 objective is bounded below by zero.
                Outcome::Unbounded => return infeasible(iteration_limit - budget),
            }
            // Each artificial is judged against the scale of its own row.
            let violated = (0..t.m).any(|i| {
                let j = t.basis[i];
                j >= t.first_artificial
                    && t.beta[i] > feasibility_tol * (1.0 + rows[t.artificial_row[j - t.first_artificial]].rhs.abs())
            });
            if violated {
                return infeasible(iteration_limit - budget);
            }
            t.expel_artificials();
        }

        let mut cost = vec![0.0; t.cols];
        cost[..n].copy_from_slice(self.objective);
        t.set_cost(cost);
        let iterations = match t.run(&mut budget) {
            Outcome::Optimal => iteration_limit - budget,
            Outcome::Limit => return limit(iteration_limit - budget),
            Outcome::Unbounded => {
                return LpSolution {
                    status: LpStatus::Unbounded,
                    values: Vec::new(),
                    objective: f64::NEG_INFINITY,
                    basis: Vec::new(),
                    iterations: iteration_limit - budget,
                }
            }
        };

        let mut shifted: Vec<f64> = t
            .state
            .iter()
            .zip(&t.upper)
            .map(|(s, &u)| if *s == State::AtUpper { u } else { 0.0 })
            .collect();
        for (i, &j) in t.basis.iter().enumerate() {
            shifted[j] = t.beta[i];
        }
        let values: Vec<f64> = (0..n)
            .map(|j| {
                let x = self.lower[j] + shifted[j];
                // Snap round-off back onto the box.
                let x = if (x - self.lower[j]).abs() < 1e-11 { self.lower[j] } else { x };
                if (x - self.upper[j]).abs() < 1e-11 {
                    self.upper[j]
                } else {
                    x
                }
            })
            .collect();
        let objective = values.iter().zip(self.objective).map(|(x, c)| x * c).sum();
        let mut basis: Vec<usize> = t.basis.iter().copied().filter(|&j| j < n).collect();
        basis.sort_unstable();
        LpSolution {
            status: LpStatus::Optimal,
            values,
            objective,
            basis,
            iterations,
        }
    }
}

fn infeasible(iterations: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        values: Vec::new(),
        objective: f64::INFINITY,
        basis: Vec::new(),
        iterations,
    }
}

fn limit(iterations: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::IterationLimit,
        values: Vec::new(),
        objective: f64::NAN,
        basis: Vec::new(),
        iterations,
    }
}

impl Tableau {
    fn build(problem: &LpProblem<'_>, rows: &[&Constraint]) -> Self {
        let n = problem.objective.len();
        let m = rows.len();
        let slacks = rows.iter().filter(|r| r.relation != Relation::Eq).count();

        // Shifted right-hand sides and the sign each row is multiplied by to
        // make them nonnegative.
        let mut rhs = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut needs_artificial = Vec::with_capacity(m);
        for r in rows {
            let b = r.rhs - r.terms.iter().map(|&(j, a)| a * problem.lower[j]).sum::<f64>();
            let s = if b < 0.0 { -1.0 } else { 1.0 };
            let slack_coef = match r.relation {
                Relation::Le => Some(s),
                Relation::Ge => Some(-s),
                Relation::Eq => None,
            };
            rhs.push(b * s);
            sign.push(s);
            needs_artificial.push(slack_coef != Some(1.0));
        }
        let artificials = needs_artificial.iter().filter(|&&x| x).count();
        let first_artificial = n + slacks;
        let cols = first_artificial + artificials;

        let mut a = vec![0.0; m * cols];
        let mut basis = vec![0; m];
        let mut state = vec![State::AtLower; cols];
        let mut upper = vec![f64::INFINITY; cols];
        for (u, (hi, lo)) in upper.iter_mut().zip(problem.upper.iter().zip(problem.lower)) {
            *u = hi - lo;
        }
        let (mut next_slack, mut next_art) = (n, first_artificial);
        let mut artificial_row = Vec::with_capacity(artificials);
        for (i, r) in rows.iter().enumerate() {
            let row = &mut a[i * cols..(i + 1) * cols];
            for &(j, coef) in &r.terms {
                row[j] += coef * sign[i];
            }
            let slack = match r.relation {
                Relation::Le => Some(sign[i]),
                Relation::Ge => Some(-sign[i]),
                Relation::Eq => None,
            };
            if let Some(coef) = slack {
                row[next_slack] = coef;
                if !needs_artificial[i] {
                    basis[i] = next_slack;
                }
                next_slack += 1;
            }
            if needs_artificial[i] {
                row[next_art] = 1.0;
                basis[i] = next_art;
                artificial_row.push(i);
                next_art += 1;
            }
        }
        for &j in &basis {
            state[j] = State::Basic;
        }

        Self {
            m,
            cols,
            a,
            beta: rhs,
            basis,
            state,
            upper,
            cost: Vec::new(),
            reduced: Vec::new(),
            first_artificial,
            artificial_row,
            cost_tol: 0.0,
        }
    }

    /// Installs a phase objective. The optimality tolerance scales with the
    /// largest cost of that phase.
    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost_tol = 1e-9 * cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let mut reduced = cost.clone();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                for (d, &aij) in reduced.iter_mut().zip(row) {
                    *d -= cb * aij;
                }
            }
        }
        self.cost = cost;
        self.reduced = reduced;
    }

    /// Bland's rule: the lowest-index improving column enters.
    fn entering(&self) -> Option<usize> {
        (0..self.cols).find(|&j| {
            if self.upper[j] <= 0.0 {
                return false;
            }
            match self.state[j] {
                State::Basic => false,
                State::AtLower => self.reduced[j] < -self.cost_tol,
                State::AtUpper => self.reduced[j] > self.cost_tol,
            }
        })
    }

    fn run(&mut self, budget: &mut usize) -> Outcome {
        loop {
            let Some(j) = self.entering() else {
                return Outcome::Optimal;
            };
            if *budget == 0 {
                return Outcome::Limit;
            }
            *budget -= 1;
            let dir = if self.state[j] == State::AtLower { 1.0 } else { -1.0 };

            // Ratio test. Ties go to the lowest variable index; the entering
            // column's own bound flip competes with index `j`.
            let mut step = self.upper[j];
            let mut leave: Option<usize> = None;
            let mut leave_var = j;
            for i in 0..self.m {
                let alpha = dir * self.a[i * self.cols + j];
                let bound = if alpha > PIVOT_TOL {
                    self.beta[i].max(0.0) / alpha
                } else if alpha < -PIVOT_TOL && self.upper[self.basis[i]].is_finite() {
                    (self.upper[self.basis[i]] - self.beta[i]).max(0.0) / -alpha
                } else {
                    continue;
                };
                let var = self.basis[i];
                if bound < step - RATIO_TIE || (bound <= step + RATIO_TIE && var < leave_var) {
                    step = bound;
                    leave = Some(i);
                    leave_var = var;
                }
            }
            if step.is_infinite() {
                return Outcome::Unbounded;
            }

            for i in 0..self.m {
                let aij = self.a[i * self.cols + j];
                if aij != 0.0 {
                    self.beta[i] -= step * dir * aij;
                }
            }
            let start = if self.state[j] == State::AtUpper { self.upper[j] } else { 0.0 };
            match leave {
                None => {
                    self.state[j] = if dir > 0.0 { State::AtUpper } else { State::AtLower };
                }
                Some(r) => {
                    let out = self.basis[r];
                    let alpha = dir * self.a[r * self.cols + j];
                    self.state[out] = if alpha > 0.0 { State::AtLower } else { State::AtUpper };
                    self.pivot(r, j);
                    self.beta[r] = start + dir * step;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + j];
        for v in &mut self.a[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + j];
            if f != 0.0 {
                let row = &mut self.a[i * cols..(i + 1) * cols];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = self.reduced[j];
        if f != 0.0 {
            for (d, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * pv;
            }
            self.reduced[j] = 0.0;
        }
        self.state[self.basis[r]] = match self.state[self.basis[r]] {
            State::Basic => State::AtLower,
            s => s,
        };
        self.basis[r] = j;
        self.state[j] = State::Basic;
    }

    /// After phase 1, pivot zero-valued artificials out of the basis where a
    /// structural or slack column can replace them, then pin every
    /// artificial to zero.
    fn expel_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let candidate = (0..self.first_artificial).find(|&j| {
                self.state[j] != State::Basic && self.a[r * self.cols + j].abs() > PIVOT_TOL
            });
            if let Some(j) = candidate {
                let value = if self.state[j] == State::AtUpper { self.upper[j] } else { 0.0 };
                let out = self.basis[r];
                self.pivot(r, j);
                self.state[out] = State::AtLower;
                self.beta[r] = value;
            }
        }
        for j in self.first_artificial..self.cols {
            self.upper[j] = 0.0;
        }
    }
}
