//! Nominal and robust efficiency of one object within one category.
//!
//! The robust program replaces each row `A_i eta <= 0` by its ellipsoidal
//! counterpart `A_i eta + sigma_i ||R_i eta|| <= 0`. The feasible point with
//! ones at the object's own column and the two trailing slots stays feasible
//! for every sigma, so every score is at most one.

use log::{debug, trace};

use crate::assembly::{build_blocks, build_row_uncertainty, DeaBlocks};
use crate::error::{Error, Result};
use crate::model::{CharacteristicTable, SigmaVector, UncertaintySpec};
use crate::proximity::descend;
use crate::settings::Settings;
use crate::solver::{dense_row, solve_conic, ConicProgram, SocConstraint, SolveStatus};

fn base_program(blocks: &DeaBlocks) -> ConicProgram {
    let nv = blocks.num_vars();
    let mut prog = ConicProgram::new(nv).minimize(blocks.c.iter().copied().collect());
    for r in 0..2 {
        let row: Vec<f64> = blocks.b.row(r).iter().copied().collect();
        prog.add_eq(dense_row(&row), 1.0);
    }
    for j in 0..nv {
        prog.set_bounds(j, Some(0.0), None);
    }
    prog
}

/// The robust efficiency program of object `t` at `sigma`. Rows with zero
/// sigma stay linear.
pub fn robust_program(
    table: &CharacteristicTable,
    category: &[usize],
    t: usize,
    sigma: &SigmaVector,
    spec: &UncertaintySpec,
) -> Result<ConicProgram> {
    if sigma.len() != table.num_rows() {
        return Err(Error::DimensionMismatch(format!(
            "sigma has {} components, table has {} constraint rows",
            sigma.len(),
            table.num_rows()
        )));
    }
    let blocks = build_blocks(table, category, t)?;
    let mut prog = base_program(&blocks);
    for i in 0..table.num_rows() {
        let a_row: Vec<f64> = blocks.a.row(i).iter().copied().collect();
        if sigma[i] == 0.0 {
            prog.add_le(dense_row(&a_row), 0.0);
            continue;
        }
        let r = build_row_uncertainty(spec, table, category, t, i)?.full();
        let map = r
            .row_iter()
            .map(|row| dense_row(&row.iter().map(|v| sigma[i] * v).collect::<Vec<_>>()))
            .collect::<Vec<_>>();
        let neg: Vec<f64> = a_row.iter().map(|v| -v).collect();
        prog.add_soc(SocConstraint {
            offset: vec![0.0; map.len()],
            map,
            scalar: dense_row(&neg),
            scalar_offset: 0.0,
        });
    }
    Ok(prog)
}

/// Relative sigma perturbations tried when a robust program cannot be
/// certified, smallest first.
const FALLBACK_STEPS: [f64; 4] = [1e-9, 1e-8, 1e-7, 1e-6];

fn optimum(prog: &ConicProgram, settings: &Settings) -> Result<f64> {
    let out = solve_conic(prog, settings.profile)?;
    let (value, _) = out.into_optimal()?;
    Ok(value)
}

fn certify(prog: &ConicProgram, settings: &Settings) -> Result<Option<f64>> {
    let out = solve_conic(prog, settings.profile)?;
    match out.status {
        SolveStatus::Optimal => Ok(out.value),
        SolveStatus::NumericFailure => Ok(None),
        _ => out.into_optimal().map(|(v, _)| Some(v)),
    }
}

/// Nominal efficiency score `E^t` of `t` within `category`, as solved.
pub fn efficiency(table: &CharacteristicTable, category: &[usize], t: usize, settings: &Settings) -> Result<f64> {
    let blocks = build_blocks(table, category, t)?;
    let mut prog = base_program(&blocks);
    for i in 0..table.num_rows() {
        let a_row: Vec<f64> = blocks.a.row(i).iter().copied().collect();
        prog.add_le(dense_row(&a_row), 0.0);
    }
    optimum(&prog, settings)
}

/// Robust efficiency optimum without the six-decimal snapping.
///
/// Just past a sigma where an output-row cone collapses onto the trivial
/// point, the program has no interior and may not be certifiable on any
/// profile. The score is nondecreasing in sigma, so the certified score at
/// a slightly enlarged sigma is returned instead. That keeps computed
/// scores monotone: a sigma found efficient stays efficient when grown.
/// Only if no enlarged sigma certifies is a slightly shrunken one tried.
pub fn robust_efficiency_raw(
    table: &CharacteristicTable,
    category: &[usize],
    t: usize,
    sigma: &SigmaVector,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<f64> {
    if let Some(v) = certify(&robust_program(table, category, t, sigma, spec)?, settings)? {
        return Ok(v);
    }
    let perturbed = FALLBACK_STEPS
        .iter()
        .map(|k| 1.0 + k)
        .chain(FALLBACK_STEPS.iter().map(|k| 1.0 - k));
    for factor in perturbed {
        let moved = sigma.scaled(factor);
        if let Some(v) = certify(&robust_program(table, category, t, &moved, spec)?, settings)? {
            debug!("object {t}: uncertified solve at {sigma:?}, using score {v} at sigma * {factor}");
            return Ok(v);
        }
    }
    Err(Error::Solver(format!(
        "robust efficiency of object {t} could not be certified near {:?}",
        sigma.values()
    )))
}

/// Maps a solved score onto `[0, 1]`, treating anything within `eps_eff`
/// of one as exactly efficient.
pub fn snap_score(raw: f64, eps_eff: f64) -> f64 {
    if raw >= 1.0 - eps_eff {
        1.0
    } else {
        raw
    }
}

/// Robust efficiency score of `t` at `sigma`; scores within `eps_eff` of one
/// are reported as exactly one.
pub fn robust_efficiency(
    table: &CharacteristicTable,
    category: &[usize],
    t: usize,
    sigma: &SigmaVector,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<f64> {
    let raw = robust_efficiency_raw(table, category, t, sigma, spec, settings)?;
    Ok(snap_score(raw, settings.eps_eff))
}

/// Smallest uniform sigma `rho * e` making `t` robustly efficient, found by
/// doubling then bisection.
pub fn min_uniform_sigma(
    table: &CharacteristicTable,
    category: &[usize],
    t: usize,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<f64> {
    let rows = table.num_rows();
    let efficient = |rho: f64| -> Result<bool> {
        Ok(robust_efficiency(table, category, t, &SigmaVector::uniform(rows, rho), spec, settings)? >= 1.0)
    };
    if efficient(0.0)? {
        return Ok(0.0);
    }
    let magnitude = table.magnitude();
    let cap = settings.sigma_max_factor * magnitude;
    let mut lo = 0.0;
    let mut hi = 1e-2 * magnitude;
    while !efficient(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return Err(Error::CapabilityNotReached {
                object: t,
                sigma_max: cap,
            });
        }
    }
    while hi - lo > settings.bisection_tol * hi {
        let mid = 0.5 * (lo + hi);
        if efficient(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Relative and absolute (times the table magnitude) offsets that move a
/// minimal sigma off the efficiency threshold.
const THRESHOLD_MARGIN: (f64, f64) = (1e-6, 1e-7);

/// `sigma` pushed just past the threshold it was found on. At the threshold
/// itself a competing solution can be feasible to within solver tolerance,
/// so the score there depends on the other components; a point slightly
/// beyond it stays efficient when those components grow.
fn off_threshold(sigma: &SigmaVector, magnitude: f64) -> SigmaVector {
    let (rel, abs) = THRESHOLD_MARGIN;
    SigmaVector::new(
        sigma
            .values()
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    v * (1.0 + rel) + abs * magnitude
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// A minimal-norm sigma making `t` robustly efficient within `category`.
///
/// Starts from the smallest uniform sigma and refines it with the same
/// first-order descent used for whole categories, applied to the single
/// score `E^t(sigma)` with target `1 - eps_eff`. The result is moved off
/// the threshold by a relative `1e-6`.
pub fn min_sigma_for_object(
    table: &CharacteristicTable,
    category: &[usize],
    t: usize,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<SigmaVector> {
    let rows = table.num_rows();
    let rho = min_uniform_sigma(table, category, t, spec, settings)?;
    if rho == 0.0 {
        return Ok(SigmaVector::zeros(rows));
    }
    let magnitude = table.magnitude();
    let start = off_threshold(&SigmaVector::uniform(rows, rho), magnitude);
    let score = |s: &SigmaVector| robust_efficiency(table, category, t, s, spec, settings);
    let anchor = start.norm();
    let run = descend(&score, start, anchor, 1.0 - settings.eps_eff, settings)?;
    trace!(
        "object {t}: uniform {rho:.6} -> norm {:.6} after {} steps ({:?})",
        run.sigma.norm(),
        run.trace.len(),
        run.exit
    );
    Ok(off_threshold(&run.sigma, magnitude))
}
