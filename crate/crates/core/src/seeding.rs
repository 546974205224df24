//! Initial classification from a cardinality-constrained p-median.
//!
//! Each object is summarized by the norm of its minimal sigma against the
//! whole collection; objects with similar norms are grouped. One p-median
//! is solved per multiset of category sizes and the partition with the
//! smallest total proximity becomes the seed.

use log::info;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dea::min_sigma_for_object;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::model::{CharacteristicTable, Classification, SigmaVector, UncertaintySpec};
use crate::settings::Settings;
use crate::solver::{solve_binary_program, BinaryProgram, SolveStatus};

/// Category sizes `p_1 <= ... <= p_S`, each at least two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SizeMultiset {
    pub sizes: Vec<usize>,
}

impl SizeMultiset {
    pub fn new(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable();
        SizeMultiset { sizes }
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Distinct sizes ascending, with their multiplicities.
    pub fn unique(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.sizes {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

/// All multisets of `s` parts, each at least two, summing to `t`, in
/// lexicographic order of their nondecreasing part lists.
pub fn enumerate_size_multisets(t: usize, s: usize) -> Result<Vec<SizeMultiset>> {
    if s == 0 || t < 2 * s {
        return Err(Error::InfeasibleSizes {
            objects: t,
            categories: s,
        });
    }
    fn rec(remaining: usize, parts: usize, min: usize, prefix: &mut Vec<usize>, out: &mut Vec<SizeMultiset>) {
        if parts == 1 {
            if remaining >= min {
                prefix.push(remaining);
                out.push(SizeMultiset { sizes: prefix.clone() });
                prefix.pop();
            }
            return;
        }
        let mut p = min;
        while p * parts <= remaining {
            prefix.push(p);
            rec(remaining - p, parts - 1, p, prefix, out);
            prefix.pop();
            p += 1;
        }
    }
    let mut out = Vec::new();
    rec(t, s, 2, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Minimal sigma of every object against the whole collection, as one
/// category.
pub fn whole_set_sigmas(
    table: &CharacteristicTable,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<Vec<SigmaVector>> {
    let all: Vec<usize> = (0..table.num_objects()).collect();
    all.par_iter()
        .map(|&t| min_sigma_for_object(table, &all, t, spec, settings))
        .collect()
}

/// `d(i, j) = | ||sigma^i|| - ||sigma^j|| |`.
pub fn distances_from_sigmas(sigmas: &[SigmaVector]) -> DMatrix<f64> {
    let norms: Vec<f64> = sigmas.iter().map(SigmaVector::norm).collect();
    DMatrix::from_fn(norms.len(), norms.len(), |i, j| (norms[i] - norms[j]).abs())
}

pub fn pairwise_distances(
    table: &CharacteristicTable,
    spec: &UncertaintySpec,
    settings: &Settings,
) -> Result<DMatrix<f64>> {
    Ok(distances_from_sigmas(&whole_set_sigmas(table, spec, settings)?))
}

fn zeta(t: usize, i: usize, j: usize) -> usize {
    i * t + j
}

/// The binary program behind [`solve_cardinality_pmedian`]. Variable
/// `zeta(i, j)` sits at `i * T + j`, `omega(j, k)` at `T^2 + j * S' + k`
/// with `k` running over the distinct sizes.
pub fn pmedian_program(distances: &DMatrix<f64>, sizes: &SizeMultiset) -> BinaryProgram {
    let t = distances.nrows();
    let unique = sizes.unique();
    let su = unique.len();
    let omega = |j: usize, k: usize| t * t + j * su + k;

    let mut objective = vec![0.0; t * t + t * su];
    for i in 0..t {
        for j in 0..t {
            objective[zeta(t, i, j)] = distances[(i, j)];
        }
    }
    let mut prog = BinaryProgram::new(objective);
    for i in 0..t {
        prog.equalities
            .push(((0..t).map(|j| (zeta(t, i, j), 1.0)).collect(), 1.0));
    }
    prog.equalities
        .push(((0..t).map(|j| (zeta(t, j, j), 1.0)).collect(), sizes.sizes.len() as f64));
    for i in 0..t {
        for j in 0..t {
            if i != j {
                prog.inequalities
                    .push((vec![(zeta(t, i, j), 1.0), (zeta(t, j, j), -1.0)], 0.0));
            }
        }
    }
    for j in 0..t {
        prog.inequalities
            .push(((0..su).map(|k| (omega(j, k), 1.0)).collect(), 1.0));
        let mut row: Vec<(usize, f64)> = (0..t).map(|i| (zeta(t, i, j), 1.0)).collect();
        row.extend(unique.iter().enumerate().map(|(k, (p, _))| (omega(j, k), -(*p as f64))));
        prog.equalities.push((row, 0.0));
    }
    for (k, (_, mult)) in unique.iter().enumerate() {
        prog.equalities
            .push(((0..t).map(|j| (omega(j, k), 1.0)).collect(), *mult as f64));
    }
    prog.branch_priority = (0..t * t).collect();
    prog
}

/// Globally optimal partition of the objects into sets of the given sizes,
/// minimizing the summed distance to each set's median. Categories come out
/// in ascending order of their median index.
///
/// Distance matrices of points on a line (every seeding instance) are
/// solved by [`line_pmedian`]; anything else goes through branch and bound
/// on [`pmedian_program`].
pub fn solve_cardinality_pmedian(distances: &DMatrix<f64>, sizes: &SizeMultiset) -> Result<Vec<Vec<usize>>> {
    check_instance(distances, sizes)?;
    match line_positions(distances) {
        Some(pos) => Ok(line_pmedian(distances, &pos, sizes)),
        None => pmedian_branch_and_bound(distances, sizes),
    }
}

fn check_instance(distances: &DMatrix<f64>, sizes: &SizeMultiset) -> Result<()> {
    let t = distances.nrows();
    if distances.ncols() != t {
        return Err(Error::DimensionMismatch("distance matrix is not square".into()));
    }
    if sizes.total() != t || sizes.sizes.contains(&0) {
        return Err(Error::InfeasibleSizes {
            objects: t,
            categories: sizes.sizes.len(),
        });
    }
    Ok(())
}

/// Solves [`pmedian_program`] with the generic binary branch and bound.
pub fn pmedian_branch_and_bound(distances: &DMatrix<f64>, sizes: &SizeMultiset) -> Result<Vec<Vec<usize>>> {
    check_instance(distances, sizes)?;
    let t = distances.nrows();
    let out = solve_binary_program(&pmedian_program(distances, sizes))?;
    if out.status != SolveStatus::Optimal {
        return Err(Error::InfeasibleBinaryProgram);
    }
    let x = out.solution.expect("optimal outcome carries a solution");
    let categories = (0..t)
        .filter(|&j| x[zeta(t, j, j)] > 0.5)
        .map(|j| (0..t).filter(|&i| x[zeta(t, i, j)] > 0.5).collect())
        .collect();
    Ok(categories)
}

/// Coordinates `a` with `d(i, j) = |a_i - a_j|`, if the matrix is a line
/// metric (to a relative `1e-12`).
pub fn line_positions(distances: &DMatrix<f64>) -> Option<Vec<f64>> {
    let t = distances.nrows();
    if t == 0 {
        return None;
    }
    // the point farthest from object 0 is an end of the line
    let end = (0..t).fold(0, |b, j| if distances[(0, j)] > distances[(0, b)] { j } else { b });
    let pos: Vec<f64> = (0..t).map(|i| distances[(end, i)]).collect();
    let tol = 1e-12 * distances.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..t {
        for j in 0..t {
            if (distances[(i, j)] - (pos[i] - pos[j]).abs()).abs() > tol {
                return None;
            }
        }
    }
    Some(pos)
}

/// Exact cardinality p-median on a line.
///
/// For points on a line some optimal assignment uses groups that are
/// contiguous in sorted order: swapping two objects that cross between
/// two medians never increases the cost, because `|x - m|` is convex. Each group's
/// cost is its distance sum to its best member, so a dynamic program over
/// contiguous segments and the remaining size counts is exact.
pub fn line_pmedian(distances: &DMatrix<f64>, positions: &[f64], sizes: &SizeMultiset) -> Vec<Vec<usize>> {
    use std::collections::HashMap;

    let t = positions.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]).then(a.cmp(&b)));
    let unique = sizes.unique();

    // best member of order[lo..hi] and the group's cost
    let segment = |lo: usize, hi: usize| -> (usize, f64) {
        let members = &order[lo..hi];
        let mut best = (usize::MAX, f64::INFINITY);
        for &m in members {
            let cost: f64 = members.iter().map(|&i| distances[(i, m)]).sum();
            if cost < best.1 || (cost == best.1 && m < best.0) {
                best = (m, cost);
            }
        }
        best
    };

    fn solve(
        counts: &mut Vec<usize>,
        pos: usize,
        unique: &[(usize, usize)],
        segment: &dyn Fn(usize, usize) -> (usize, f64),
        memo: &mut HashMap<Vec<usize>, (f64, Option<usize>)>,
    ) -> f64 {
        if counts.iter().all(|&c| c == 0) {
            return 0.0;
        }
        if let Some((v, _)) = memo.get(counts) {
            return *v;
        }
        let mut best = (f64::INFINITY, None);
        for k in 0..unique.len() {
            if counts[k] == 0 {
                continue;
            }
            let p = unique[k].0;
            counts[k] -= 1;
            let v = segment(pos, pos + p).1 + solve(counts, pos + p, unique, segment, memo);
            counts[k] += 1;
            if v < best.0 {
                best = (v, Some(k));
            }
        }
        memo.insert(counts.clone(), best);
        best.0
    }

    let mut counts: Vec<usize> = unique.iter().map(|(_, m)| *m).collect();
    let mut memo = HashMap::new();
    solve(&mut counts, 0, &unique, &segment, &mut memo);

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut pos = 0;
    while let Some(&(_, Some(k))) = memo.get(&counts) {
        let p = unique[k].0;
        let (median, _) = segment(pos, pos + p);
        let mut members = order[pos..pos + p].to_vec();
        members.sort_unstable();
        groups.push((median, members));
        counts[k] -= 1;
        pos += p;
    }
    groups.sort_by_key(|(m, _)| *m);
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Mean of the members' whole-set sigma norms; used to order categories.
fn mean_norm(category: &[usize], norms: &[f64]) -> f64 {
    category.iter().map(|&i| norms[i]).sum::<f64>() / category.len() as f64
}

/// One candidate seed per size multiset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedCandidate {
    pub sizes: SizeMultiset,
    pub classification: Classification,
}

/// Seeds for every size multiset, in multiset order, with proximities
/// attached. Categories within a seed are ordered from the most to the
/// least efficient (ascending mean whole-set sigma norm).
pub fn seed_candidates(engine: &Engine, num_categories: usize) -> Result<Vec<SeedCandidate>> {
    let table = engine.table();
    let multisets = enumerate_size_multisets(table.num_objects(), num_categories)?;
    let sigmas = whole_set_sigmas(table, engine.spec(), engine.settings())?;
    let norms: Vec<f64> = sigmas.iter().map(SigmaVector::norm).collect();
    let distances = distances_from_sigmas(&sigmas);

    let partitions = multisets
        .par_iter()
        .map(|sizes| {
            let mut cats = solve_cardinality_pmedian(&distances, sizes)?;
            cats.sort_by(|a, b| {
                mean_norm(a, &norms)
                    .total_cmp(&mean_norm(b, &norms))
                    .then_with(|| a.cmp(b))
            });
            Ok(cats)
        })
        .collect::<Result<Vec<_>>>()?;
    info!("solved {} p-median programs", partitions.len());

    engine.prefetch(partitions.iter().flatten().cloned())?;
    multisets
        .into_iter()
        .zip(partitions)
        .map(|(sizes, cats)| {
            Ok(SeedCandidate {
                sizes,
                classification: engine.evaluate(&Classification::new(cats))?,
            })
        })
        .collect()
}

/// The candidate with the smallest total proximity; ties go to the earliest
/// multiset.
pub fn best_seed(candidates: &[SeedCandidate]) -> Option<&SeedCandidate> {
    let mut best: Option<&SeedCandidate> = None;
    for c in candidates {
        if best.is_none_or(|b| c.classification.total < b.classification.total) {
            best = Some(c);
        }
    }
    best
}

/// The seed of [`best_seed`] over all size multisets.
pub fn seed_classification(engine: &Engine, num_categories: usize) -> Result<Classification> {
    let candidates = seed_candidates(engine, num_categories)?;
    let best = best_seed(&candidates).expect("at least one size multiset exists");
    info!(
        "seed sizes {:?}, total {:.6}",
        best.sizes.sizes,
        best.classification.total.unwrap()
    );
    Ok(best.classification.clone())
}
