use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use log::debug;

use super::presolve::eliminate_fixed;
use super::{record, Backend, ConicProgram, SolveOutcome, SolveStatus, ToleranceProfile};
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-8;
const MIN_DIGITS: u32 = 6;

/// Solves `prog`, starting at `profile` and escalating to looser profiles on
/// numeric trouble. Linear programs try the simplex route first.
///
/// Returns `NumericFailure` only after every profile of the ladder failed.
pub fn solve_conic(prog: &ConicProgram, profile: ToleranceProfile) -> Result<SolveOutcome> {
    prog.check_dimensions().map_err(Error::DimensionMismatch)?;
    let outcome = solve_unrecorded(prog, profile);
    record(&outcome);
    Ok(outcome)
}

fn solve_unrecorded(prog: &ConicProgram, profile: ToleranceProfile) -> SolveOutcome {
    let scale = prog.data_scale();
    let mut retries = 0;
    if prog.is_linear() {
        match simplex(prog, scale) {
            Some(outcome) => return outcome,
            None => retries += 1,
        }
    }
    let Some(reduced) = eliminate_fixed(prog, scale) else {
        return SolveOutcome {
            retries,
            ..SolveOutcome::failed(SolveStatus::Infeasible, 0)
        };
    };
    for (k, p) in profile.ladder_from().enumerate() {
        if k > 0 {
            retries += 1;
        }
        match interior_point(&reduced.program, p, scale) {
            Attempt::Done(mut outcome) => {
                if let Some(x) = outcome.solution.take() {
                    let x = reduced.expand(&x);
                    let violation = prog.max_violation(&x);
                    if violation > RESIDUAL_TOL * scale {
                        debug!("conic solve at {p:?} rejected: expanded residual {violation:e}");
                        continue;
                    }
                    outcome.value = Some(prog.objective.iter().zip(&x).map(|(c, v)| c * v).sum());
                    outcome.solution = Some(x);
                }
                outcome.retries = retries;
                return outcome;
            }
            Attempt::Retry(reason) => debug!("conic solve at {p:?} rejected: {reason}"),
        }
    }
    SolveOutcome::failed(SolveStatus::NumericFailure, retries)
}

fn certified_digits(err: f64) -> u32 {
    let err = err.max(1e-16);
    (-err.log10()).floor().clamp(0.0, 16.0) as u32
}

/// `None` when the simplex answer could not be certified.
fn simplex(prog: &ConicProgram, scale: f64) -> Option<SolveOutcome> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..prog.num_vars)
        .map(|j| {
            let lo = prog.lower_bounds[j].unwrap_or(f64::NEG_INFINITY);
            let hi = prog.upper_bounds[j].unwrap_or(f64::INFINITY);
            lp.add_var(prog.objective[j], (lo, hi))
        })
        .collect();
    let expr = |row: &super::LinearRow| row.iter().map(|&(j, a)| (vars[j], a)).collect::<Vec<_>>();
    for (row, rhs) in &prog.equalities {
        lp.add_constraint(expr(row), ComparisonOp::Eq, *rhs);
    }
    for (row, rhs) in &prog.inequalities {
        lp.add_constraint(expr(row), ComparisonOp::Le, *rhs);
    }
    match lp.solve() {
        Ok(sol) => {
            let x: Vec<f64> = vars.iter().map(|v| sol[*v]).collect();
            let violation = prog.max_violation(&x);
            if violation > RESIDUAL_TOL * scale {
                debug!("simplex residual {violation:e} too large, falling back");
                return None;
            }
            let value = prog.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
            Some(SolveOutcome {
                status: SolveStatus::Optimal,
                value: Some(value),
                solution: Some(x),
                certified_digits: certified_digits(violation.max(1e-12 * scale)),
                profile: None,
                backend: Some(Backend::Simplex),
                retries: 0,
            })
        }
        Err(minilp::Error::Infeasible) => Some(SolveOutcome {
            backend: Some(Backend::Simplex),
            ..SolveOutcome::failed(SolveStatus::Infeasible, 0)
        }),
        Err(minilp::Error::Unbounded) => Some(SolveOutcome {
            backend: Some(Backend::Simplex),
            ..SolveOutcome::failed(SolveStatus::Unbounded, 0)
        }),
    }
}

enum Attempt {
    Done(SolveOutcome),
    Retry(String),
}

fn settings_for(profile: ToleranceProfile) -> DefaultSettings<f64> {
    let (gap, feas, iters): (f64, f64, u32) = match profile {
        ToleranceProfile::Strict => (1e-10, 1e-10, 100),
        ToleranceProfile::Tight => (1e-9, 1e-9, 200),
        ToleranceProfile::Standard => (1e-8, 1e-8, 300),
        ToleranceProfile::Relaxed => (1e-7, 1e-8, 500),
    };
    let mut b = DefaultSettingsBuilder::default();
    b.verbose(false)
        .max_iter(iters)
        .tol_gap_abs(gap)
        .tol_gap_rel(gap)
        .tol_feas(feas)
        .tol_ktratio(gap.max(1e-8))
        .presolve_enable(false);
    // Looser rungs also change the numerics, not just the stopping test:
    // shorter steps, more refinement, heavier equilibration, regularization.
    match profile {
        ToleranceProfile::Strict => {}
        ToleranceProfile::Tight => {
            b.max_step_fraction(0.95).iterative_refinement_max_iter(20);
        }
        ToleranceProfile::Standard => {
            b.max_step_fraction(0.9)
                .iterative_refinement_max_iter(40)
                .equilibrate_max_iter(50);
        }
        ToleranceProfile::Relaxed => {
            b.max_step_fraction(0.8)
                .iterative_refinement_max_iter(40)
                .equilibrate_max_iter(50)
                .static_regularization_constant(1e-7);
        }
    }
    b.build().expect("static solver settings are valid")
}

/// Clarabel standard form: `A x + s = b`, `s` in a product of cones, in the
/// order equalities, nonnegatives (inequalities then bounds), cones.
fn interior_point(prog: &ConicProgram, profile: ToleranceProfile, scale: f64) -> Attempt {
    let n = prog.num_vars;
    let (mut ri, mut cj, mut v, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut m = 0;
    let mut push_row = |row: &super::LinearRow, sign: f64, rhs: f64, m: &mut usize| {
        for &(j, a) in row {
            ri.push(*m);
            cj.push(j);
            v.push(sign * a);
        }
        b.push(rhs);
        *m += 1;
    };

    let mut cones = Vec::new();
    for (row, rhs) in &prog.equalities {
        push_row(row, 1.0, *rhs, &mut m);
    }
    if !prog.equalities.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(prog.equalities.len()));
    }
    let nonneg_start = m;
    for (row, rhs) in &prog.inequalities {
        push_row(row, 1.0, *rhs, &mut m);
    }
    for j in 0..n {
        if let Some(lo) = prog.lower_bounds[j] {
            push_row(&vec![(j, 1.0)], -1.0, -lo, &mut m);
        }
        if let Some(hi) = prog.upper_bounds[j] {
            push_row(&vec![(j, 1.0)], 1.0, hi, &mut m);
        }
    }
    if m > nonneg_start {
        cones.push(SupportedConeT::NonnegativeConeT(m - nonneg_start));
    }
    for c in &prog.cones {
        push_row(&c.scalar, -1.0, c.scalar_offset, &mut m);
        for (row, g) in c.map.iter().zip(&c.offset) {
            push_row(row, -1.0, *g, &mut m);
        }
        cones.push(SupportedConeT::SecondOrderConeT(c.map.len() + 1));
    }

    let a = CscMatrix::new_from_triplets(m, n, ri, cj, v);
    let p = CscMatrix::zeros((n, n));
    let mut solver = match DefaultSolver::new(&p, &prog.objective, &a, &b, &cones, settings_for(profile)) {
        Ok(s) => s,
        Err(e) => return Attempt::Retry(format!("setup failed: {e}")),
    };
    solver.solve();
    let sol = &solver.solution;
    match sol.status {
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            return Attempt::Done(SolveOutcome {
                profile: Some(profile),
                backend: Some(Backend::InteriorPoint),
                ..SolveOutcome::failed(SolveStatus::Infeasible, 0)
            })
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            return Attempt::Done(SolveOutcome {
                profile: Some(profile),
                backend: Some(Backend::InteriorPoint),
                ..SolveOutcome::failed(SolveStatus::Unbounded, 0)
            })
        }
        // Any other status still leaves the best iterate in `sol`; it is
        // accepted only if it passes the residual and digit checks below.
        SolverStatus::Solved
        | SolverStatus::AlmostSolved
        | SolverStatus::InsufficientProgress
        | SolverStatus::MaxIterations => {}
        other => return Attempt::Retry(format!("status {other:?}")),
    }
    let x = sol.x.clone();
    let violation = prog.max_violation(&x);
    if violation > RESIDUAL_TOL * scale {
        return Attempt::Retry(format!(
            "{:?} with primal residual {violation:e} value {} gap {:e}",
            sol.status,
            sol.obj_val,
            (sol.obj_val - sol.obj_val_dual).abs()
        ));
    }
    let value = prog.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    let gap = (sol.obj_val - sol.obj_val_dual).abs();
    let digits = certified_digits(gap.max(violation));
    if digits < MIN_DIGITS {
        return Attempt::Retry(format!("{:?} with only {digits} certified digits", sol.status));
    }
    Attempt::Done(SolveOutcome {
        status: SolveStatus::Optimal,
        value: Some(value),
        solution: Some(x),
        certified_digits: digits,
        profile: Some(profile),
        backend: Some(Backend::InteriorPoint),
        retries: 0,
    })
}
