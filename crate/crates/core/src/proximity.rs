//! Proximity to equitable efficiency of a category.
//!
//! The proximity `P^s` is the smallest `||sigma||` at which every member is
//! robustly efficient. It is bracketed by the componentwise maximum
//! `sigma_hat` of per-member minimal sigmas:
//!
//! ```text
//!     ||sigma_hat|| / sqrt(M + N)  <=  P^s  <=  ||sigma_hat||
//! ```
//!
//! When `sigma_hat` coincides with one member's minimal sigma the upper
//! bound is exact. Otherwise a first-order loop walks down from
//! `sigma_hat` while keeping `Gamma(sigma) = sum_t E^t(sigma)` within
//! `epsilon` of `|C|`:
//!
//! 1. approximate `grad Gamma` with backward differences,
//! 2. take the unit direction minimizing `d'sigma` subject to
//!    `d'grad >= 0`, stopping once that optimum is nonnegative,
//! 3. bisect for the longest feasible step that keeps `||sigma||` above the
//!    lower bound.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dea::{efficiency, min_sigma_for_object, robust_efficiency};
use crate::error::Result;
use crate::model::{CharacteristicTable, LoopExit, ProximityResult, SigmaVector, TraceEntry, UncertaintySpec};
use crate::settings::Settings;

/// Direction-search optima at or above `-DIRECTION_TOL` end the loop.
pub const DIRECTION_TOL: f64 = 1e-9;
/// Bisection stops once the bracket is this fraction of the step bound.
const LINE_SEARCH_RESOLUTION: f64 = 1e-8;
/// Componentwise tolerance for recognising a single-object `sigma_hat`.
const SINGLE_OBJECT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEvaluation {
    pub sigma: SigmaVector,
    pub per_object_scores: Vec<f64>,
    pub gamma: f64,
}

/// Scores the members of one category, skipping members that are already
/// efficient at zero sigma (their robust score is one for every sigma).
struct CategoryScorer<'a> {
    table: &'a CharacteristicTable,
    spec: &'a UncertaintySpec,
    settings: &'a Settings,
    members: Vec<usize>,
    always_efficient: Vec<bool>,
}

impl<'a> CategoryScorer<'a> {
    fn new(
        table: &'a CharacteristicTable,
        category: &[usize],
        spec: &'a UncertaintySpec,
        settings: &'a Settings,
        always_efficient: Option<Vec<bool>>,
    ) -> Result<Self> {
        let mut members = category.to_vec();
        members.sort_unstable();
        let always_efficient = match always_efficient {
            Some(v) => v,
            None => members
                .par_iter()
                .map(|&t| {
                    let zero = SigmaVector::zeros(table.num_rows());
                    Ok(robust_efficiency(table, &members, t, &zero, spec, settings)? >= 1.0)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(CategoryScorer {
            table,
            spec,
            settings,
            members,
            always_efficient,
        })
    }

    fn score(&self, k: usize, sigma: &SigmaVector) -> Result<f64> {
        if self.always_efficient[k] {
            return Ok(1.0);
        }
        robust_efficiency(
            self.table,
            &self.members,
            self.members[k],
            sigma,
            self.spec,
            self.settings,
        )
    }

    fn evaluate(&self, sigma: &SigmaVector) -> Result<GammaEvaluation> {
        let per_object_scores = (0..self.members.len())
            .into_par_iter()
            .map(|k| self.score(k, sigma))
            .collect::<Result<Vec<_>>>()?;
        let gamma = per_object_scores.iter().sum();
        Ok(GammaEvaluation {
            sigma: sigma.clone(),
            per_object_scores,
            gamma,
        })
    }

    fn gamma(&self, sigma: &SigmaVector) -> Result<f64> {
        Ok(self.evaluate(sigma)?.gamma)
    }
}

/// `Gamma(sigma)`, the summed robust efficiency of the category members.
pub fn gamma(
    table: &CharacteristicTable,
    category: &[usize],
    sigma: &SigmaVector,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<GammaEvaluation> {
    CategoryScorer::new(table, category, spec, settings, Some(vec![false; category.len()]))?.evaluate(sigma)
}

/// Backward differences of `f` at `sigma` with step `delta` (clipped to
/// `sigma_i`; components at zero get a zero derivative). `value` is `f(sigma)`.
pub(crate) fn backward_gradient(
    f: &(dyn Fn(&SigmaVector) -> Result<f64> + Sync),
    sigma: &SigmaVector,
    value: f64,
    delta: f64,
) -> Result<Vec<f64>> {
    (0..sigma.len())
        .into_par_iter()
        .map(|i| {
            let h = delta.min(sigma[i]);
            if h <= 0.0 {
                return Ok(0.0);
            }
            let below = f(&sigma.with_component(i, sigma[i] - h))?;
            Ok((value - below) / h)
        })
        .collect()
}

/// Backward-difference approximation of `grad Gamma` at `sigma`.
pub fn gamma_gradient(
    table: &CharacteristicTable,
    category: &[usize],
    sigma: &SigmaVector,
    delta: f64,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<Vec<f64>> {
    let scorer = CategoryScorer::new(table, category, spec, settings, None)?;
    let value = scorer.gamma(sigma)?;
    backward_gradient(&|s| scorer.gamma(s), sigma, value, delta)
}

/// Forward-difference counterpart of [`gamma_gradient`]. At any
/// feasible-for-classification sigma both evaluations see `|C|`, so this
/// returns zeros there; kept for comparison only.
pub fn gamma_gradient_forward(
    table: &CharacteristicTable,
    category: &[usize],
    sigma: &SigmaVector,
    delta: f64,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<Vec<f64>> {
    let scorer = CategoryScorer::new(table, category, spec, settings, None)?;
    let value = scorer.gamma(sigma)?;
    (0..sigma.len())
        .map(|i| Ok((scorer.gamma(&sigma.with_component(i, sigma[i] + delta))? - value) / delta))
        .collect()
}

/// Solves `min { d'sigma : d'grad >= 0, d'd <= 1 }` in closed form.
///
/// Returns the minimizer and the optimal value. When `-sigma` already
/// satisfies the halfspace the answer is `-sigma / ||sigma||`; otherwise it
/// is the normalized projection of `-sigma` onto the hyperplane orthogonal
/// to `grad`, or zero if that projection vanishes.
pub fn direction_search(sigma: &[f64], grad: &[f64]) -> (Vec<f64>, f64) {
    let norm = sigma.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (vec![0.0; sigma.len()], 0.0);
    }
    let sg: f64 = sigma.iter().zip(grad).map(|(s, g)| s * g).sum();
    if sg <= 0.0 {
        let d = sigma.iter().map(|s| -s / norm).collect();
        return (d, -norm);
    }
    let gg: f64 = grad.iter().map(|g| g * g).sum();
    let p: Vec<f64> = sigma.iter().zip(grad).map(|(s, g)| -s + sg / gg * g).collect();
    let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if pn <= 1e-12 * norm {
        return (vec![0.0; sigma.len()], 0.0);
    }
    let d: Vec<f64> = p.iter().map(|v| v / pn).collect();
    let value = sigma.iter().zip(&d).map(|(s, v)| s * v).sum();
    (d, value)
}

/// Largest step along unit `d` that keeps `||sigma + alpha d||` at or above
/// `anchor_norm / sqrt(len)` and every component nonnegative. A negative
/// radicand is clamped to zero.
pub fn step_bound(sigma: &SigmaVector, d: &[f64], anchor_norm: f64) -> f64 {
    let sd = sigma.dot(d);
    let floor2 = anchor_norm * anchor_norm / sigma.len() as f64;
    let radicand = (sd * sd - (sigma.norm().powi(2) - floor2)).max(0.0);
    let mut alpha = -sd - radicand.sqrt();
    for (s, di) in sigma.values().iter().zip(d) {
        if *di < 0.0 {
            alpha = alpha.min(s / -di);
        }
    }
    alpha.max(0.0)
}

/// Longest step in `[0, step_bound]` (to bisection resolution) with
/// `f(sigma + alpha d) >= threshold`, and `f` there. Assumes `f(sigma)` meets
/// the threshold.
pub(crate) fn line_search_with(
    f: &(dyn Fn(&SigmaVector) -> Result<f64> + Sync),
    sigma: &SigmaVector,
    d: &[f64],
    anchor_norm: f64,
    threshold: f64,
) -> Result<(f64, Option<f64>)> {
    let alpha_max = step_bound(sigma, d, anchor_norm);
    if alpha_max <= 0.0 {
        return Ok((0.0, None));
    }
    let at_max = f(&sigma.step(alpha_max, d))?;
    if at_max >= threshold {
        return Ok((alpha_max, Some(at_max)));
    }
    let (mut lo, mut hi) = (0.0, alpha_max);
    let mut lo_value = None;
    while hi - lo > LINE_SEARCH_RESOLUTION * alpha_max {
        let mid = 0.5 * (lo + hi);
        let v = f(&sigma.step(mid, d))?;
        if v >= threshold {
            lo = mid;
            lo_value = Some(v);
        } else {
            hi = mid;
        }
    }
    Ok((lo, lo_value))
}

/// Step length from `sigma` along `d` for the category, keeping
/// `Gamma >= |C| - epsilon` and the norm above `||sigma_hat|| / sqrt(M+N)`.
#[allow(clippy::too_many_arguments)]
pub fn line_search(
    table: &CharacteristicTable,
    category: &[usize],
    sigma: &SigmaVector,
    d: &[f64],
    sigma_hat_norm: f64,
    epsilon: f64,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<f64> {
    let scorer = CategoryScorer::new(table, category, spec, settings, None)?;
    let threshold = category.len() as f64 - epsilon;
    Ok(line_search_with(&|s| scorer.gamma(s), sigma, d, sigma_hat_norm, threshold)?.0)
}

/// Outcome of a first-order descent loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub sigma: SigmaVector,
    pub value: f64,
    pub exit: LoopExit,
    pub final_direction_value: f64,
    pub trace: Vec<TraceEntry>,
}

/// Runs the gradient / direction / line-search loop on `f` from `start`,
/// which must satisfy `f(start) >= threshold`.
pub(crate) fn descend(
    f: &(dyn Fn(&SigmaVector) -> Result<f64> + Sync),
    start: SigmaVector,
    anchor_norm: f64,
    threshold: f64,
    settings: &Settings,
) -> Result<Descent> {
    let mut sigma = start;
    let mut value = f(&sigma)?;
    let mut trace = Vec::new();
    let direction_at = |sigma: &SigmaVector, value: f64| -> Result<(Vec<f64>, f64)> {
        let grad = backward_gradient(f, sigma, value, settings.step_at(sigma.norm_inf()))?;
        Ok(direction_search(sigma.values(), &grad))
    };

    for _ in 0..settings.max_iters {
        let (d, d_value) = direction_at(&sigma, value)?;
        if d_value >= -DIRECTION_TOL {
            return Ok(Descent {
                sigma,
                value,
                exit: LoopExit::Converged,
                final_direction_value: d_value,
                trace,
            });
        }
        let (alpha, new_value) = line_search_with(f, &sigma, &d, anchor_norm, threshold)?;
        let next = sigma.step(alpha, &d);
        match new_value {
            Some(v) if alpha > 0.0 && next.norm() < sigma.norm() => {
                sigma = next;
                value = v;
                trace.push(TraceEntry {
                    sigma_norm: sigma.norm(),
                    gamma: value,
                    direction_value: d_value,
                    alpha,
                });
            }
            _ => {
                return Ok(Descent {
                    sigma,
                    value,
                    exit: LoopExit::Stalled,
                    final_direction_value: d_value,
                    trace,
                })
            }
        }
    }
    let (_, d_value) = direction_at(&sigma, value)?;
    let exit = if d_value >= -DIRECTION_TOL {
        LoopExit::Converged
    } else {
        LoopExit::IterationLimit
    };
    Ok(Descent {
        sigma,
        value,
        exit,
        final_direction_value: d_value,
        trace,
    })
}

/// Componentwise maximum of the members' minimal sigmas, together with the
/// minimal sigmas themselves. Categories of at most two members return zeros.
pub fn sigma_hat_with_members(
    table: &CharacteristicTable,
    category: &[usize],
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<(SigmaVector, Vec<SigmaVector>)> {
    let rows = table.num_rows();
    let mut members = category.to_vec();
    members.sort_unstable();
    if members.len() <= 2 {
        return Ok((SigmaVector::zeros(rows), vec![SigmaVector::zeros(rows); members.len()]));
    }
    let sigmas = members
        .par_iter()
        .map(|&t| min_sigma_for_object(table, &members, t, spec, settings))
        .collect::<Result<Vec<_>>>()?;
    let hat = sigmas.iter().fold(SigmaVector::zeros(rows), |acc, s| acc.max_with(s));
    Ok((hat, sigmas))
}

pub fn sigma_hat(
    table: &CharacteristicTable,
    category: &[usize],
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<SigmaVector> {
    Ok(sigma_hat_with_members(table, category, spec, settings)?.0)
}

/// Proximity to equitable efficiency of `category`.
pub fn proximity(
    table: &CharacteristicTable,
    category: &[usize],
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<ProximityResult> {
    let rows = table.num_rows();
    let mut members = category.to_vec();
    members.sort_unstable();

    if members.len() <= 2 {
        let override_pair = if members.len() == 2 {
            let mut any_inefficient = false;
            for &t in &members {
                any_inefficient |= efficiency(table, &members, t, settings)? < 1.0 - settings.eps_eff;
            }
            any_inefficient
        } else {
            false
        };
        return Ok(ProximityResult::zero(members, rows, override_pair));
    }

    let (hat, object_sigmas) = sigma_hat_with_members(table, &members, spec, settings)?;
    let upper = hat.norm();
    let lower = upper / (rows as f64).sqrt();
    let single = object_sigmas.iter().any(|s| {
        s.values()
            .iter()
            .zip(hat.values())
            .all(|(a, b)| (a - b).abs() <= SINGLE_OBJECT_TOL)
    });
    let mut result = ProximityResult {
        members: members.clone(),
        object_sigmas,
        sigma_hat: hat.clone(),
        sigma: hat.clone(),
        lower_bound: lower,
        upper_bound: upper,
        estimate: upper,
        decided_by_single_object: single,
        pair_rule_override: false,
        exit: LoopExit::NotRun,
        final_direction_value: None,
        trace: Vec::new(),
    };
    if single {
        return Ok(result);
    }

    let always_efficient = result.object_sigmas.iter().map(|s| s.norm() == 0.0).collect();
    let scorer = CategoryScorer::new(table, &members, spec, settings, Some(always_efficient))?;
    let threshold = members.len() as f64 - settings.epsilon;
    let run = descend(&|s| scorer.gamma(s), hat, upper, threshold, settings)?;
    debug!(
        "category {:?}: {:.6} -> {:.6} in {} steps ({:?})",
        members,
        upper,
        run.sigma.norm(),
        run.trace.len(),
        run.exit
    );
    result.estimate = run.sigma.norm();
    result.sigma = run.sigma;
    result.exit = run.exit;
    result.final_direction_value = Some(run.final_direction_value);
    result.trace = run.trace;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_points_at_origin() {
        let (d, v) = direction_search(&[3.0, 4.0], &[0.0, 0.0]);
        assert!((d[0] + 0.6).abs() < 1e-15 && (d[1] + 0.8).abs() < 1e-15);
        assert!((v + 5.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_gradient_stops() {
        let (d, v) = direction_search(&[1.0, 0.0], &[1.0, 0.0]);
        assert_eq!(v, 0.0);
        assert_eq!(d, vec![0.0, 0.0]);
    }

    #[test]
    fn orthogonal_gradient_keeps_radial_direction() {
        let (d, v) = direction_search(&[1.0, 1.0], &[1.0, -1.0]);
        let r = 1.0 / 2f64.sqrt();
        assert!((d[0] + r).abs() < 1e-15 && (d[1] + r).abs() < 1e-15);
        assert!((v + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projected_direction_is_tangent() {
        let (d, v) = direction_search(&[1.0, 2.0], &[1.0, 1.0]);
        assert!((d[0] + d[1]).abs() < 1e-12);
        assert!(v < 0.0);
        assert!((d.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_bound_respects_floor_and_sign() {
        let sigma = SigmaVector::new(vec![3.0, 4.0]);
        // radial move toward the origin stops at norm 5/sqrt(2)
        let d = [-0.6, -0.8];
        let a = step_bound(&sigma, &d, 5.0);
        assert!((a - (5.0 - 5.0 / 2f64.sqrt())).abs() < 1e-12);
        // direction driving the first component negative is capped
        let d = [-1.0, 0.0];
        let a = step_bound(&sigma, &d, 0.0);
        assert!((a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn line_search_hits_cap_on_constant_gamma() {
        let sigma = SigmaVector::new(vec![3.0, 4.0]);
        let d = [-0.6, -0.8];
        let (a, _) = line_search_with(&|_| Ok(3.0), &sigma, &d, 5.0, 3.0 - 1e-4).unwrap();
        assert_eq!(a, step_bound(&sigma, &d, 5.0));
    }

    #[test]
    fn line_search_zero_when_nothing_feasible() {
        let sigma = SigmaVector::new(vec![3.0, 4.0]);
        let d = [-0.6, -0.8];
        let f = |s: &SigmaVector| Ok(if s.norm() >= 5.0 { 3.0 } else { 2.0 });
        let (a, v) = line_search_with(&f, &sigma, &d, 5.0, 3.0 - 1e-4).unwrap();
        assert_eq!(a, 0.0);
        assert_eq!(v, None);
    }

    #[test]
    fn line_search_finds_interior_threshold() {
        let sigma = SigmaVector::new(vec![3.0, 4.0]);
        let d = [-0.6, -0.8];
        // feasible while the norm stays at least 4.5
        let f = |s: &SigmaVector| Ok(if s.norm() >= 4.5 { 1.0 } else { 0.0 });
        let (a, _) = line_search_with(&f, &sigma, &d, 5.0, 0.5).unwrap();
        assert!((a - 0.5).abs() < 1e-7);
    }

    #[test]
    fn descent_on_linear_boundary_reaches_foot_point() {
        // feasible region { s1 + s2 >= 1 }: minimal norm at (0.5, 0.5)
        let f = |s: &SigmaVector| {
            Ok(if s[0] + s[1] >= 1.0 - 1e-12 {
                1.0
            } else {
                1.0 - (1.0 - s[0] - s[1])
            })
        };
        let start = SigmaVector::new(vec![0.9, 0.3]);
        let anchor = start.norm();
        let run = descend(&f, start, anchor, 1.0 - 1e-9, &Settings::default()).unwrap();
        assert!((run.sigma.norm() - 0.5f64.sqrt()).abs() < 1e-6, "{:?}", run.sigma);
        assert_eq!(run.exit, LoopExit::Converged);
    }
}
