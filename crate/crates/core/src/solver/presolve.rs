//! Removal of variables pinned by equal bounds or single-variable equality
//! rows. Interior-point methods handle such variables poorly when the
//! optimum also sits at a cone apex.

use super::{ConicProgram, LinearRow, SocConstraint};

const FIX_TOL: f64 = 1e-12;

pub(crate) struct Reduced {
    pub program: ConicProgram,
    /// Reduced variable index -> original index.
    pub kept: Vec<usize>,
    pub fixed: Vec<Option<f64>>,
}

impl Reduced {
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full: Vec<f64> = self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (k, &j) in self.kept.iter().enumerate() {
            full[j] = x[k];
        }
        full
    }
}

fn find_fixings(prog: &ConicProgram, scale: f64) -> Option<Vec<Option<f64>>> {
    let tol = FIX_TOL * scale;
    let mut fixed: Vec<Option<f64>> = (0..prog.num_vars)
        .map(|j| match (prog.lower_bounds[j], prog.upper_bounds[j]) {
            (Some(lo), Some(hi)) if lo == hi => Some(lo),
            _ => None,
        })
        .collect();
    loop {
        let mut changed = false;
        for (row, rhs) in &prog.equalities {
            let mut free = row.iter().filter(|(j, a)| fixed[*j].is_none() && *a != 0.0);
            let (Some(&(j, a)), None) = (free.next(), free.next()) else {
                continue;
            };
            let rest: f64 = row
                .iter()
                .filter(|(k, _)| *k != j)
                .map(|(k, c)| c * fixed[*k].unwrap_or(0.0))
                .sum();
            fixed[j] = Some((rhs - rest) / a);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    for (j, f) in fixed.iter().enumerate() {
        if let Some(v) = f {
            if prog.lower_bounds[j].is_some_and(|lo| *v < lo - tol)
                || prog.upper_bounds[j].is_some_and(|hi| *v > hi + tol)
            {
                return None;
            }
        }
    }
    Some(fixed)
}

/// `None` when the pinned values already violate the program.
pub(crate) fn eliminate_fixed(prog: &ConicProgram, scale: f64) -> Option<Reduced> {
    let fixed = find_fixings(prog, scale)?;
    let tol = FIX_TOL * scale;
    let mut index = vec![None; prog.num_vars];
    let mut kept = Vec::new();
    for j in 0..prog.num_vars {
        if fixed[j].is_none() {
            index[j] = Some(kept.len());
            kept.push(j);
        }
    }
    let fixed_values: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let split = |row: &LinearRow| -> (LinearRow, f64) {
        let reduced = row.iter().filter_map(|&(j, a)| index[j].map(|k| (k, a))).collect();
        let constant = row
            .iter()
            .filter(|(j, _)| fixed[*j].is_some())
            .map(|&(j, a)| a * fixed_values[j])
            .sum();
        (reduced, constant)
    };

    let mut out = ConicProgram::new(kept.len());
    out.objective = kept.iter().map(|&j| prog.objective[j]).collect();
    for &j in &kept {
        let k = index[j].unwrap();
        out.lower_bounds[k] = prog.lower_bounds[j];
        out.upper_bounds[k] = prog.upper_bounds[j];
    }
    for (row, rhs) in &prog.equalities {
        let (r, c) = split(row);
        if r.is_empty() {
            if (c - rhs).abs() > tol {
                return None;
            }
        } else {
            out.equalities.push((r, rhs - c));
        }
    }
    for (row, rhs) in &prog.inequalities {
        let (r, c) = split(row);
        if r.is_empty() {
            if c > rhs + tol {
                return None;
            }
        } else {
            out.inequalities.push((r, rhs - c));
        }
    }
    for cone in &prog.cones {
        let mut map = Vec::with_capacity(cone.map.len());
        let mut offset = Vec::with_capacity(cone.map.len());
        for (row, g) in cone.map.iter().zip(&cone.offset) {
            let (r, c) = split(row);
            map.push(r);
            offset.push(g + c);
        }
        let (scalar, c) = split(&cone.scalar);
        out.cones.push(SocConstraint {
            map,
            offset,
            scalar,
            scalar_offset: cone.scalar_offset + c,
        });
    }
    debug_assert!(out.check_dimensions().is_ok());
    Some(Reduced {
        program: out,
        kept,
        fixed,
    })
}
