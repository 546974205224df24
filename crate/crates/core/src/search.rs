use log::info;

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::model::Classification;
use crate::seeding::seed_classification;

/// Totals must drop by more than this to count as an improvement.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

/// Moving `object` from category `from` into category `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub object: usize,
    pub from: usize,
    pub to: usize,
}

/// Every single-object move that leaves no category empty, ordered by
/// object, then destination category.
pub fn moves(classification: &Classification) -> Vec<Move> {
    let mut out = Vec::new();
    let mut owned: Vec<(usize, usize)> = classification
        .categories
        .iter()
        .enumerate()
        .flat_map(|(s, c)| c.iter().map(move |&t| (t, s)))
        .collect();
    owned.sort_unstable();
    for (object, from) in owned {
        if classification.categories[from].len() < 2 {
            continue;
        }
        for to in 0..classification.num_categories() {
            if to != from {
                out.push(Move { object, from, to });
            }
        }
    }
    out
}

pub fn apply(classification: &Classification, m: Move) -> Classification {
    let mut cats = classification.categories.clone();
    cats[m.from].retain(|&t| t != m.object);
    cats[m.to].push(m.object);
    Classification::new(cats)
}

/// All classifications one move away, in [`moves`] order.
pub fn neighbors(classification: &Classification) -> Vec<Classification> {
    moves(classification)
        .into_iter()
        .map(|m| apply(classification, m))
        .collect()
}

/// Best neighbor of `incumbent` if it lowers the total proximity by more
/// than [`IMPROVEMENT_TOL`]; otherwise the incumbent and `false`.
///
/// Only the two categories touched by each move are new; the rest come
/// from the engine's cache.
pub fn improve(engine: &Engine, incumbent: &Classification) -> Result<(Classification, bool)> {
    let incumbent = match incumbent.total {
        Some(_) => incumbent.clone(),
        None => engine.evaluate(incumbent)?,
    };
    let current = incumbent.total.expect("evaluated classification has a total");
    let candidates = moves(&incumbent);
    engine.prefetch(candidates.iter().flat_map(|m| {
        let n = apply(&incumbent, *m);
        [n.categories[m.from].clone(), n.categories[m.to].clone()]
    }))?;

    let mut best: Option<(f64, Move)> = None;
    for m in candidates {
        let n = apply(&incumbent, m);
        let total: f64 = n
            .categories
            .iter()
            .map(|c| Ok(engine.proximity(c)?.estimate))
            .sum::<Result<f64>>()?;
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, m));
        }
    }
    match best {
        Some((total, m)) if total < current - IMPROVEMENT_TOL => {
            info!(
                "move object {} from category {} to {}: total {:.6} -> {:.6}",
                m.object, m.from, m.to, current, total
            );
            Ok((engine.evaluate(&apply(&incumbent, m))?, true))
        }
        _ => Ok((incumbent, false)),
    }
}

/// Improves `seed` until no single move helps. `history[0]` is the seed
/// and the last entry is the local optimum.
pub fn descend(engine: &Engine, seed: &Classification) -> Result<Vec<Classification>> {
    let mut current = engine.evaluate(seed)?;
    let mut history = vec![current.clone()];
    loop {
        let (next, improved) = improve(engine, &current)?;
        if !improved {
            break;
        }
        history.push(next.clone());
        current = next;
    }
    info!(
        "search finished after {} improvements, total {:.6}",
        history.len() - 1,
        current.total.unwrap()
    );
    Ok(history)
}

/// Seeds and then improves until no single move helps. Returns the final
/// classification and the history from [`descend`].
pub fn classify(engine: &Engine, num_categories: usize) -> Result<(Classification, Vec<Classification>)> {
    let t = engine.table().num_objects();
    if num_categories == 0 || t < 2 * num_categories {
        return Err(Error::InfeasibleSizes {
            objects: t,
            categories: num_categories,
        });
    }
    let seed = seed_classification(engine, num_categories)?;
    let history = descend(engine, &seed)?;
    Ok((history.last().unwrap().clone(), history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pairs_have_four_neighbors() {
        let c = Classification::new(vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(neighbors(&c).len(), 4);
    }

    #[test]
    fn singleton_cannot_be_emptied() {
        let c = Classification::new(vec![vec![0], vec![1, 2]]);
        let n = neighbors(&c);
        assert_eq!(n.len(), 2);
        assert_eq!(n[0].categories, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn single_category_has_no_neighbors() {
        assert!(neighbors(&Classification::new(vec![vec![0, 1, 2]])).is_empty());
    }
}
