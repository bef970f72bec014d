use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::simplex::LpProblem;
use super::{
    Constraint, LpSolution, LpStatus, MilpModel, MilpSolution, MilpStatus, Relation, SolveOptions,
    TiebreakMode, Variable,
};
use crate::error::{Error, Result};

/// Best-bound branch-and-bound over the simplex relaxation, branching on
/// the most fractional integer variable.
///
/// Variables in `model.branch_first` are branched on before any other, even
/// when their relaxed value is already integral. Once they are all fixed,
/// the remaining variables are split into connected components of the
/// constraint graph and each component is solved on its own.
///
/// With [`TiebreakMode::Lexicographic`] the model's secondary objectives are
/// optimized in turn, each stage constrained to stay within the gap
/// tolerance of every earlier stage's optimum.
pub fn solve_milp(model: &MilpModel, options: &SolveOptions) -> Result<MilpSolution> {
    model.check()?;
    options.check()?;
    let mut budget = Budget {
        used: 0,
        max: options.max_nodes,
    };
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let values = if model.branch_first.is_empty() {
        solve_region(model, options, &lower, &upper, &mut budget)?
    } else {
        solve_linked(model, options, lower, upper, &mut budget)?
    };
    Ok(match values {
        Some(values) => MilpSolution {
            status: MilpStatus::Optimal,
            objective: model.objective_value(&values),
            values,
            nodes: budget.used,
        },
        None => MilpSolution::infeasible(budget.used),
    })
}

/// Node counter shared by every search of one solve.
struct Budget {
    used: usize,
    max: usize,
}

impl Budget {
    fn charge(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.max {
            return Err(Error::NodeLimit);
        }
        Ok(())
    }
}

fn dense(n: usize, terms: &[(usize, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(j, a) in terms {
        out[j] += a;
    }
    out
}

fn dense_to_sparse(dense: &[f64]) -> Vec<(usize, f64)> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(j, &a)| (j, a))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Objectives in lexicographic order: primary, then the tiebreaks if enabled.
fn objectives(model: &MilpModel, options: &SolveOptions) -> Vec<Vec<f64>> {
    let n = model.num_variables();
    let mut out = vec![model.variables.iter().map(|v| v.objective).collect()];
    if options.tiebreak == TiebreakMode::Lexicographic {
        out.extend(model.tiebreaks.iter().map(|t| dense(n, t)));
    }
    out
}

/// `gap` widened by the rounding error expected at magnitude `z`.
fn window(gap: f64, z: f64) -> f64 {
    gap + 1e-12 * z.abs()
}

/// `a` beats `b` if it is lower by more than the window on the first key
/// where the two differ by more than the window.
fn lex_better(a: &[f64], b: &[f64], gap: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        let w = window(gap, *y);
        if *x < y - w {
            return true;
        }
        if *x > y + w {
            return false;
        }
    }
    false
}

fn relax(
    model: &MilpModel,
    options: &SolveOptions,
    objective: &[f64],
    lower: &[f64],
    upper: &[f64],
    extra: &[Constraint],
) -> Result<Option<LpSolution>> {
    let lp = LpProblem {
        objective,
        lower,
        upper,
        rows: &model.constraints,
        extra_rows: extra,
    };
    let sol = lp.solve(options.iteration_limit(model), options.feasibility_tol);
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol)),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Unbounded),
        LpStatus::IterationLimit => Err(Error::IterationLimit),
    }
}

/// Most fractional integer variable among `candidates`; ties go to the
/// earliest candidate.
fn most_fractional(
    variables: &[Variable],
    values: &[f64],
    candidates: impl Iterator<Item = usize>,
    tol: f64,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in candidates {
        if !variables[j].integer {
            continue;
        }
        let dist = (values[j] - libm::round(values[j])).abs();
        if dist <= tol {
            continue;
        }
        if best.is_none_or(|(_, d)| dist > d + 1e-12) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

fn snap(variables: &[Variable], mut values: Vec<f64>) -> Vec<f64> {
    for (x, v) in values.iter_mut().zip(variables) {
        if v.integer {
            *x = libm::round(*x);
        }
    }
    values
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

// Min-heap on (bound, seq) so the search order is deterministic.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Outer search over the linking variables. Every leaf has them all fixed
/// and is finished by [`solve_region`].
fn solve_linked(
    model: &MilpModel,
    options: &SolveOptions,
    lower: Vec<f64>,
    upper: Vec<f64>,
    budget: &mut Budget,
) -> Result<Option<Vec<f64>>> {
    let objectives = objectives(model, options);
    let primary = &objectives[0];
    let lexicographic = objectives.len() > 1;
    let gap = options.gap_tol;
    // Under a tiebreak, nodes that can only tie the incumbent still matter.
    let pruned = |bound: f64, incumbent: &Option<(Vec<f64>, Vec<f64>)>| match incumbent {
        None => false,
        Some((_, keys)) if lexicographic => bound > keys[0] + window(gap, keys[0]),
        Some((_, keys)) => bound >= keys[0] - window(gap, keys[0]),
    };

    let Some(root) = relax(model, options, primary, &lower, &upper, &[])? else {
        return Ok(None);
    };
    let mut incumbent: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bound: root.objective,
        seq,
        lower,
        upper,
        values: root.values,
    });

    while let Some(node) = heap.pop() {
        if pruned(node.bound, &incumbent) {
            continue;
        }
        let open: Vec<usize> = model
            .branch_first
            .iter()
            .copied()
            .filter(|&j| node.lower[j] < node.upper[j])
            .collect();
        let integral = || {
            most_fractional(
                &model.variables,
                &node.values,
                0..model.num_variables(),
                options.integrality_tol,
            )
            .is_none()
        };
        let candidate = if open.is_empty() {
            solve_region(model, options, &node.lower, &node.upper, budget)?
        } else if !lexicographic && integral() {
            Some(snap(&model.variables, node.values.clone()))
        } else {
            let j = most_fractional(
                &model.variables,
                &node.values,
                open.iter().copied(),
                options.integrality_tol,
            )
            .unwrap_or(open[0]);
            let x = node.values[j];
            let split = if (x - libm::round(x)).abs() > options.integrality_tol {
                libm::floor(x)
            } else if libm::round(x) < node.upper[j] {
                libm::round(x)
            } else {
                libm::round(x) - 1.0
            };
            for (lo, hi) in [(node.lower[j], split), (split + 1.0, node.upper[j])] {
                budget.charge()?;
                let mut lower = node.lower.clone();
                let mut upper = node.upper.clone();
                lower[j] = lo;
                upper[j] = hi;
                let Some(sol) = relax(model, options, primary, &lower, &upper, &[])? else {
                    continue;
                };
                if pruned(sol.objective, &incumbent) {
                    continue;
                }
                seq += 1;
                heap.push(Node {
                    bound: sol.objective,
                    seq,
                    lower,
                    upper,
                    values: sol.values,
                });
            }
            continue;
        };

        if let Some(values) = candidate {
            let keys: Vec<f64> = objectives.iter().map(|c| dot(c, &values)).collect();
            if incumbent
                .as_ref()
                .is_none_or(|(_, best)| lex_better(&keys, best, gap))
            {
                incumbent = Some((values, keys));
            }
        }
    }
    Ok(incumbent.map(|(values, _)| values))
}

/// Solves the model restricted to the box `[lower, upper]` by splitting the
/// free variables into independent components. Fixed variables keep their
/// value.
fn solve_region(
    model: &MilpModel,
    options: &SolveOptions,
    lower: &[f64],
    upper: &[f64],
    budget: &mut Budget,
) -> Result<Option<Vec<f64>>> {
    let n = model.num_variables();
    let free: Vec<bool> = (0..n).map(|j| lower[j] < upper[j]).collect();
    let mut values = lower.to_vec();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut j: usize) -> usize {
        while parent[j] != j {
            parent[j] = parent[parent[j]];
            j = parent[j];
        }
        j
    }
    let mut row_anchor = vec![None; model.num_constraints()];
    for (i, row) in model.constraints.iter().enumerate() {
        let mut anchor = None;
        for &(j, a) in &row.terms {
            if !free[j] || a == 0.0 {
                continue;
            }
            match anchor {
                None => anchor = Some(j),
                Some(k) => {
                    let (rj, rk) = (find(&mut parent, j), find(&mut parent, k));
                    parent[rj.max(rk)] = rj.min(rk);
                }
            }
        }
        if anchor.is_none()
            && row.violation(&values) > options.feasibility_tol * (1.0 + row.rhs.abs())
        {
            return Ok(None);
        }
        row_anchor[i] = anchor;
    }

    let mut slot = vec![usize::MAX; n];
    let mut local = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in (0..n).filter(|&j| free[j]) {
        let r = find(&mut parent, j);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        slot[j] = slot[r];
        local[j] = groups[slot[j]].len();
        groups[slot[j]].push(j);
    }
    let mut group_rows: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (i, anchor) in row_anchor.iter().enumerate() {
        if let Some(j) = anchor {
            group_rows[slot[*j]].push(i);
        }
    }

    for (g, vars) in groups.iter().enumerate() {
        let restrict = |terms: &[(usize, f64)]| -> Vec<(usize, f64)> {
            terms
                .iter()
                .filter(|(j, _)| free[*j] && slot[*j] == g)
                .map(|&(j, a)| (local[j], a))
                .collect()
        };
        let sub = MilpModel {
            variables: vars
                .iter()
                .map(|&j| Variable {
                    lower: lower[j],
                    upper: upper[j],
                    ..model.variables[j].clone()
                })
                .collect(),
            constraints: group_rows[g]
                .iter()
                .map(|&i| {
                    let row = &model.constraints[i];
                    let fixed: f64 = row
                        .terms
                        .iter()
                        .filter(|(j, _)| !free[*j])
                        .map(|&(j, a)| a * values[j])
                        .sum();
                    Constraint {
                        terms: restrict(&row.terms),
                        relation: row.relation,
                        rhs: row.rhs - fixed,
                    }
                })
                .collect(),
            tiebreaks: model.tiebreaks.iter().map(|t| restrict(t)).collect(),
            branch_first: Vec::new(),
        };
        let Some(part) = solve_staged(&sub, options, budget)? else {
            return Ok(None);
        };
        for (&j, x) in vars.iter().zip(part) {
            values[j] = x;
        }
    }
    Ok(Some(values))
}

/// Relative slack on the stage rows. Exact ties differ only by round-off;
/// an absolute slack would let the stage LPs drift by an amount that
/// depends on the objective's scale.
const TIE_WINDOW: f64 = 1e-12;

/// Plain branch-and-bound on the primary objective, then one more search
/// per tiebreak.
fn solve_staged(model: &MilpModel, options: &SolveOptions, budget: &mut Budget) -> Result<Option<Vec<f64>>> {
    let objectives = objectives(model, options);
    let mut search = Search {
        model,
        options,
        budget,
    };
    let mut stage_rows: Vec<Constraint> = Vec::new();
    let Some((mut values, mut stage_value)) = search.run(&objectives[0], &stage_rows)? else {
        return Ok(None);
    };
    let mut previous = 0;
    for (k, objective) in objectives.iter().enumerate().skip(1) {
        if objective.iter().all(|a| *a == 0.0) {
            continue;
        }
        stage_rows.push(Constraint {
            terms: dense_to_sparse(&objectives[previous]),
            relation: Relation::Le,
            rhs: stage_value + TIE_WINDOW * stage_value.abs().max(1.0),
        });
        // The previous stage's point satisfies every stage row, so an
        // empty result can only come from round-off; keep that point.
        let Some((v, z)) = search.run(objective, &stage_rows)? else {
            break;
        };
        values = v;
        stage_value = z;
        previous = k;
    }
    Ok(Some(values))
}

struct Search<'a> {
    model: &'a MilpModel,
    options: &'a SolveOptions,
    budget: &'a mut Budget,
}

impl Search<'_> {
    /// Minimizes `objective` over the model plus `extra` rows. Returns the
    /// best integral point and its objective value.
    fn run(&mut self, objective: &[f64], extra: &[Constraint]) -> Result<Option<(Vec<f64>, f64)>> {
        let (model, options) = (self.model, self.options);
        let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
        let Some(root) = relax(model, options, objective, &lower, &upper, extra)? else {
            return Ok(None);
        };
        let gap = options.gap_tol;

        let mut incumbent: Option<(Vec<f64>, f64)> = None;
        let mut heap = BinaryHeap::new();
        let mut seq = 0;
        heap.push(Node {
            bound: root.objective,
            seq,
            lower,
            upper,
            values: root.values,
        });

        while let Some(node) = heap.pop() {
            if let Some((_, best)) = &incumbent {
                if node.bound >= best - window(gap, *best) {
                    continue;
                }
            }
            let n = model.num_variables();
            let Some(j) = most_fractional(&model.variables, &node.values, 0..n, options.integrality_tol)
            else {
                let values = snap(&model.variables, node.values);
                let z = dot(&values, objective);
                if incumbent.as_ref().is_none_or(|(_, best)| z < best - window(gap, *best)) {
                    incumbent = Some((values, z));
                }
                continue;
            };

            let x = node.values[j];
            let children = [
                (node.lower[j], libm::floor(x)),
                (libm::ceil(x), node.upper[j]),
            ];
            for (lo, hi) in children {
                if lo > hi {
                    continue;
                }
                self.budget.charge()?;
                let mut lower = node.lower.clone();
                let mut upper = node.upper.clone();
                lower[j] = lo;
                upper[j] = hi;
                let Some(sol) = relax(model, options, objective, &lower, &upper, extra)? else {
                    continue;
                };
                if let Some((_, best)) = &incumbent {
                    if sol.objective >= best - window(gap, *best) {
                        continue;
                    }
                }
                seq += 1;
                heap.push(Node {
                    bound: sol.objective,
                    seq,
                    lower,
                    upper,
                    values: sol.values,
                });
            }
        }
        Ok(incumbent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::verify_solution;

    #[test]
    fn integral_relaxation_needs_no_branching() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0.0, 10.0, true, 1.0);
        let y = m.add_variable("y", 0.0, 10.0, true, 1.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Ge, 4.0);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert_eq!(sol.nodes, 0);
        assert!((sol.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn small_knapsack() {
        // Three-item, three-row binary knapsack checked against enumeration.
        let mut m = MilpModel::new();
        let w = [(5.0, [2.0, 4.0, 3.0]), (4.0, [3.0, 1.0, 4.0]), (3.0, [1.0, 2.0, 2.0])];
        for (i, (profit, _)) in w.iter().enumerate() {
            m.add_variable(alloc::format!("v{i}"), 0.0, 1.0, true, -profit);
        }
        for (r, cap) in [5.0, 11.0, 8.0].iter().enumerate() {
            let terms = (0..3).map(|i| (i, w[i].1[r])).collect();
            m.add_constraint(terms, Relation::Le, *cap);
        }
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();

        let mut best = f64::INFINITY;
        for mask in 0u32..8 {
            let v: Vec<f64> = (0..3).map(|i| f64::from((mask >> i) & 1)).collect();
            if m.constraints.iter().all(|c| c.violation(&v) == 0.0) {
                best = best.min(m.objective_value(&v));
            }
        }
        assert!((sol.objective - best).abs() < 1e-9);
        verify_solution(&m, &sol.values, 1e-9, 1e-6).unwrap();
    }

    #[test]
    fn fractional_relaxation_branches() {
        // min -x - y  s.t. 2x + 2y <= 3, integers in [0, 3]
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0.0, 3.0, true, -1.0);
        let y = m.add_variable("y", 0.0, 3.0, true, -1.0);
        m.add_constraint(vec![(x, 2.0), (y, 2.0)], Relation::Le, 3.0);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-9);
        assert!(sol.nodes > 0);
    }

    #[test]
    fn infeasible_integer_program() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0.0, 5.0, true, 1.0);
        m.add_constraint(vec![(x, 2.0)], Relation::Eq, 3.0);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Infeasible);
    }

    #[test]
    fn node_limit_is_an_error() {
        let mut m = MilpModel::new();
        let x = m.add_variable("x", 0.0, 100.0, true, -1.0);
        let y = m.add_variable("y", 0.0, 100.0, true, -1.0);
        m.add_constraint(vec![(x, 2.0), (y, 2.0)], Relation::Le, 3.0);
        let o = SolveOptions {
            max_nodes: 1,
            ..SolveOptions::default()
        };
        assert_eq!(solve_milp(&m, &o), Err(Error::NodeLimit));
    }

    #[test]
    fn lexicographic_tiebreak_picks_secondary_optimum() {
        // Two ways to cover demand 1 at equal cost; the tiebreak prefers b.
        let mut m = MilpModel::new();
        let a = m.add_variable("a", 0.0, 1.0, true, 1.0);
        let b = m.add_variable("b", 0.0, 1.0, true, 1.0);
        m.add_constraint(vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        m.tiebreaks.push(vec![(a, 1.0)]);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.values, vec![0.0, 1.0]);
        m.tiebreaks[0] = vec![(b, 1.0)];
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.values, vec![1.0, 0.0]);
    }
}
