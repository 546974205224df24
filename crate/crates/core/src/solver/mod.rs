//! Convex solving behind one interface.
//!
//! Pure linear programs go to a dense simplex first; programs with
//! second-order-cone rows (and LPs the simplex could not certify) go to an
//! interior-point conic solver, retried along a ladder of progressively
//! looser tolerance profiles. An optimal outcome always carries an objective
//! trusted to at least six decimal places and primal residuals within
//! `1e-8` of the program's data scale.

mod binary;
mod conic;
mod presolve;

pub use binary::{solve_binary_program, BinaryProgram};
pub use conic::solve_conic;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Sparse linear form as `(variable, coefficient)` pairs.
pub type LinearRow = Vec<(usize, f64)>;

/// Dense coefficients to a [`LinearRow`], dropping zeros.
pub fn dense_row(coefficients: &[f64]) -> LinearRow {
    coefficients
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| (j, *v))
        .collect()
}

pub(crate) fn eval_row(row: &LinearRow, x: &[f64]) -> f64 {
    row.iter().map(|&(j, a)| a * x[j]).sum()
}

/// `|| map x + offset ||_2 <= scalar x + scalar_offset`
#[derive(Debug, Clone, PartialEq)]
pub struct SocConstraint {
    pub map: Vec<LinearRow>,
    pub offset: Vec<f64>,
    pub scalar: LinearRow,
    pub scalar_offset: f64,
}

/// `min objective'x` subject to linear equalities, `<=` inequalities,
/// second-order cones and variable bounds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub equalities: Vec<(LinearRow, f64)>,
    pub inequalities: Vec<(LinearRow, f64)>,
    pub cones: Vec<SocConstraint>,
    pub lower_bounds: Vec<Option<f64>>,
    pub upper_bounds: Vec<Option<f64>>,
}

impl ConicProgram {
    /// Unbounded variables, zero objective, no constraints.
    pub fn new(num_vars: usize) -> Self {
        ConicProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            lower_bounds: vec![None; num_vars],
            upper_bounds: vec![None; num_vars],
            ..Default::default()
        }
    }

    pub fn minimize(mut self, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self
    }

    pub fn add_eq(&mut self, row: LinearRow, rhs: f64) {
        self.equalities.push((row, rhs));
    }

    pub fn add_le(&mut self, row: LinearRow, rhs: f64) {
        self.inequalities.push((row, rhs));
    }

    pub fn add_soc(&mut self, cone: SocConstraint) {
        self.cones.push(cone);
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) {
        self.lower_bounds[var] = lower;
        self.upper_bounds[var] = upper;
    }

    pub fn is_linear(&self) -> bool {
        self.cones.is_empty()
    }

    /// Largest absolute coefficient or right-hand side, at least 1.
    pub(crate) fn data_scale(&self) -> f64 {
        let mut s = 1.0_f64;
        let mut see = |v: f64| s = s.max(v.abs());
        for (row, rhs) in self.equalities.iter().chain(&self.inequalities) {
            see(*rhs);
            row.iter().for_each(|(_, a)| see(*a));
        }
        for c in &self.cones {
            see(c.scalar_offset);
            c.offset.iter().for_each(|v| see(*v));
            c.scalar.iter().for_each(|(_, a)| see(*a));
            c.map.iter().flatten().for_each(|(_, a)| see(*a));
        }
        for b in self.lower_bounds.iter().chain(&self.upper_bounds).flatten() {
            see(*b);
        }
        s
    }

    /// Largest primal constraint violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (row, rhs) in &self.equalities {
            worst = worst.max((eval_row(row, x) - rhs).abs());
        }
        for (row, rhs) in &self.inequalities {
            worst = worst.max(eval_row(row, x) - rhs);
        }
        for c in &self.cones {
            let lhs = c
                .map
                .iter()
                .zip(&c.offset)
                .map(|(r, g)| {
                    let v = eval_row(r, x) + g;
                    v * v
                })
                .sum::<f64>()
                .sqrt();
            worst = worst.max(lhs - eval_row(&c.scalar, x) - c.scalar_offset);
        }
        for ((v, lo), hi) in x.iter().zip(&self.lower_bounds).zip(&self.upper_bounds) {
            if let Some(lo) = lo {
                worst = worst.max(lo - v);
            }
            if let Some(hi) = hi {
                worst = worst.max(v - hi);
            }
        }
        worst
    }

    pub(crate) fn check_dimensions(&self) -> Result<(), String> {
        let n = self.num_vars;
        if self.objective.len() != n || self.lower_bounds.len() != n || self.upper_bounds.len() != n {
            return Err("objective or bound vectors do not match num_vars".into());
        }
        let rows = self.equalities.iter().chain(&self.inequalities).map(|(r, _)| r).chain(
            self.cones
                .iter()
                .flat_map(|c| c.map.iter().chain(std::iter::once(&c.scalar))),
        );
        for r in rows {
            if r.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err("constraint row references a missing variable or holds a non-finite value".into());
            }
        }
        if self.cones.iter().any(|c| c.map.len() != c.offset.len()) {
            return Err("cone map and offset lengths differ".into());
        }
        Ok(())
    }
}

/// Numeric strictness of a conic solve, strictest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    Strict,
    Tight,
    Standard,
    Relaxed,
}

impl ToleranceProfile {
    pub const LADDER: [ToleranceProfile; 4] = [
        ToleranceProfile::Strict,
        ToleranceProfile::Tight,
        ToleranceProfile::Standard,
        ToleranceProfile::Relaxed,
    ];

    /// This profile and every looser one after it.
    pub fn ladder_from(self) -> impl Iterator<Item = ToleranceProfile> {
        Self::LADDER.into_iter().filter(move |p| *p >= self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Simplex,
    InteriorPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub value: Option<f64>,
    pub solution: Option<Vec<f64>>,
    /// Decimal places of the objective the solve certifies (0 unless optimal).
    pub certified_digits: u32,
    /// Profile that produced the outcome (`None` for the simplex route).
    pub profile: Option<ToleranceProfile>,
    pub backend: Option<Backend>,
    /// Profiles tried after the first one failed.
    pub retries: u32,
}

impl SolveOutcome {
    pub(crate) fn failed(status: SolveStatus, retries: u32) -> Self {
        SolveOutcome {
            status,
            value: None,
            solution: None,
            certified_digits: 0,
            profile: None,
            backend: None,
            retries,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Objective value and solution of an optimal outcome.
    pub fn into_optimal(self) -> crate::Result<(f64, Vec<f64>)> {
        match (self.status, self.value, self.solution) {
            (SolveStatus::Optimal, Some(v), Some(x)) => Ok((v, x)),
            (status, ..) => Err(crate::Error::Solver(format!("solve ended with status {status:?}"))),
        }
    }
}

/// Process-wide solve counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub solves: u64,
    pub retries: u64,
    pub failures: u64,
}

static SOLVES: AtomicU64 = AtomicU64::new(0);
static RETRIES: AtomicU64 = AtomicU64::new(0);
static FAILURES: AtomicU64 = AtomicU64::new(0);

pub(crate) fn record(outcome: &SolveOutcome) {
    SOLVES.fetch_add(1, Ordering::Relaxed);
    RETRIES.fetch_add(outcome.retries as u64, Ordering::Relaxed);
    if outcome.status == SolveStatus::NumericFailure {
        FAILURES.fetch_add(1, Ordering::Relaxed);
    }
}

/// Snapshot of the counters since process start.
pub fn stats() -> SolveStats {
    SolveStats {
        solves: SOLVES.load(Ordering::Relaxed),
        retries: RETRIES.load(Ordering::Relaxed),
        failures: FAILURES.load(Ordering::Relaxed),
    }
}

impl std::ops::Sub for SolveStats {
    type Output = SolveStats;
    fn sub(self, rhs: SolveStats) -> SolveStats {
        SolveStats {
            solves: self.solves - rhs.solves,
            retries: self.retries - rhs.retries,
            failures: self.failures - rhs.failures,
        }
    }
}
