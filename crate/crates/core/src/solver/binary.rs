use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::trace;

use super::{eval_row, solve_conic, Backend, ConicProgram, LinearRow, SolveOutcome, SolveStatus, ToleranceProfile};
use crate::error::{Error, Result};

const INTEGRALITY_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-9;

/// `min objective'x` over `x in {0,1}^n` with linear constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BinaryProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub equalities: Vec<(LinearRow, f64)>,
    pub inequalities: Vec<(LinearRow, f64)>,
    /// Variables branched on before any other fractional variable.
    pub branch_priority: Vec<usize>,
}

impl BinaryProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        BinaryProgram {
            num_vars: objective.len(),
            objective,
            ..Default::default()
        }
    }

    /// Exact feasibility of a 0/1 point.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.equalities
            .iter()
            .all(|(r, rhs)| (eval_row(r, x) - rhs).abs() <= 1e-9)
            && self.inequalities.iter().all(|(r, rhs)| eval_row(r, x) <= rhs + 1e-9)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn relaxation(&self, fixed: &[Option<bool>]) -> ConicProgram {
        let mut lp = ConicProgram::new(self.num_vars).minimize(self.objective.clone());
        lp.equalities = self.equalities.clone();
        lp.inequalities = self.inequalities.clone();
        for (j, f) in fixed.iter().enumerate() {
            let (lo, hi) = match f {
                None => (0.0, 1.0),
                Some(false) => (0.0, 0.0),
                Some(true) => (1.0, 1.0),
            };
            lp.set_bounds(j, Some(lo), Some(hi));
        }
        lp
    }
}

struct Node {
    bound: f64,
    seq: u64,
    fixed: Vec<Option<bool>>,
    relaxed: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn fractionality(v: f64) -> f64 {
    v.min(1.0 - v)
}

/// Most fractional variable, priority set first, ties to the lowest index.
fn branching_variable(prog: &BinaryProgram, x: &[f64]) -> Option<usize> {
    let pick = |candidates: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<(usize, f64)> = None;
        for j in candidates {
            let f = fractionality(x[j]);
            if f > INTEGRALITY_TOL && best.is_none_or(|(bj, bf)| f > bf || (f == bf && j < bj)) {
                best = Some((j, f));
            }
        }
        best.map(|(j, _)| j)
    };
    pick(&mut prog.branch_priority.iter().copied()).or_else(|| pick(&mut (0..prog.num_vars)))
}

/// Globally optimal 0/1 solution by best-first branch and bound on the LP
/// relaxation.
pub fn solve_binary_program(prog: &BinaryProgram) -> Result<SolveOutcome> {
    if prog.objective.len() != prog.num_vars {
        return Err(Error::DimensionMismatch(
            "objective length differs from num_vars".into(),
        ));
    }
    let relax = |fixed: &[Option<bool>]| -> Result<Option<(f64, Vec<f64>)>> {
        let out = solve_conic(&prog.relaxation(fixed), ToleranceProfile::Strict)?;
        match out.status {
            SolveStatus::Optimal => Ok(out.value.zip(out.solution)),
            SolveStatus::Infeasible => Ok(None),
            other => Err(Error::Solver(format!("LP relaxation ended with {other:?}"))),
        }
    };

    let root_fixed = vec![None; prog.num_vars];
    let Some((bound, relaxed)) = relax(&root_fixed)? else {
        return Ok(SolveOutcome::failed(SolveStatus::Infeasible, 0));
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bound,
        seq,
        fixed: root_fixed,
        relaxed,
    });
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;

    let offer = |x: Vec<f64>, incumbent: &mut Option<(f64, Vec<f64>)>| {
        if prog.is_feasible(&x) {
            let v = prog.value(&x);
            if incumbent.as_ref().is_none_or(|(best, _)| v < best - PRUNE_TOL) {
                *incumbent = Some((v, x));
            }
        }
    };

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - PRUNE_TOL {
                break;
            }
        }
        nodes += 1;
        let rounded: Vec<f64> = node.relaxed.iter().map(|v| v.round().clamp(0.0, 1.0)).collect();
        let Some(j) = branching_variable(prog, &node.relaxed) else {
            offer(rounded, &mut incumbent);
            continue;
        };
        offer(rounded, &mut incumbent);
        for value in [false, true] {
            let mut fixed = node.fixed.clone();
            fixed[j] = Some(value);
            if let Some((bound, relaxed)) = relax(&fixed)? {
                if incumbent.as_ref().is_none_or(|(best, _)| bound < best - PRUNE_TOL) {
                    seq += 1;
                    heap.push(Node {
                        bound,
                        seq,
                        fixed,
                        relaxed,
                    });
                }
            }
        }
    }
    trace!("branch and bound explored {nodes} nodes");

    Ok(match incumbent {
        Some((value, x)) => SolveOutcome {
            status: SolveStatus::Optimal,
            value: Some(value),
            solution: Some(x),
            certified_digits: 9,
            profile: None,
            backend: Some(Backend::Simplex),
            retries: 0,
        },
        None => SolveOutcome::failed(SolveStatus::Infeasible, 0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two items, two slots, each item in one slot and each slot used once.
    #[test]
    fn two_by_two_assignment() {
        // x = (x00, x01, x10, x11); cost of item i in slot j
        let mut p = BinaryProgram::new(vec![0.0, 5.0, 5.0, 0.0]);
        p.equalities.push((vec![(0, 1.0), (1, 1.0)], 1.0));
        p.equalities.push((vec![(2, 1.0), (3, 1.0)], 1.0));
        p.equalities.push((vec![(0, 1.0), (2, 1.0)], 1.0));
        p.equalities.push((vec![(1, 1.0), (3, 1.0)], 1.0));
        let out = solve_binary_program(&p).unwrap();
        assert_eq!(out.value, Some(0.0));
        assert_eq!(out.solution.unwrap(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn infeasible_parity() {
        // x0 + x1 = 1 and x0 + x1 = 2 cannot both hold
        let mut p = BinaryProgram::new(vec![1.0, 1.0]);
        p.equalities.push((vec![(0, 1.0), (1, 1.0)], 1.0));
        p.equalities.push((vec![(0, 1.0), (1, 1.0)], 2.0));
        assert_eq!(solve_binary_program(&p).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn integrality_gap_forces_branching() {
        // max x0 + x1 + x2 with pairwise x_i + x_j <= 1: LP gives 1.5, IP gives 1
        let mut p = BinaryProgram::new(vec![-1.0, -1.0, -1.0]);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            p.inequalities.push((vec![(i, 1.0), (j, 1.0)], 1.0));
        }
        let out = solve_binary_program(&p).unwrap();
        assert_eq!(out.value, Some(-1.0));
    }
}
