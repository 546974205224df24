#![allow(dead_code)]

use equiclass::CharacteristicTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random table with `t` objects, `n` inputs in `[0.5, 3]` and `m` outputs
/// in `[0.2, 3]`.
pub fn random_table(rng: &mut ChaCha8Rng, t: usize, n: usize, m: usize) -> CharacteristicTable {
    let ids = (0..t).map(|k| format!("o{k}")).collect();
    let x: Vec<Vec<f64>> = (0..t)
        .map(|_| (0..n).map(|_| rng.gen_range(0.5..3.0)).collect())
        .collect();
    let y: Vec<Vec<f64>> = (0..t)
        .map(|_| (0..m).map(|_| rng.gen_range(0.2..3.0)).collect())
        .collect();
    CharacteristicTable::from_rows(ids, &x, &y).unwrap()
}

/// Three tiers of three objects. Each tier lies on its own concave
/// frontier, the tiers' output ranges do not overlap, and every object
/// below the top tier uses more input than the cheapest object of each
/// tier above it, so it is dominated there.
pub fn planted_tiers() -> CharacteristicTable {
    let pts = [
        (1.0, 2.0),
        (2.0, 2.4),
        (3.0, 2.6),
        (1.5, 1.2),
        (2.5, 1.5),
        (3.5, 1.7),
        (2.0, 0.4),
        (3.0, 0.7),
        (4.0, 0.9),
    ];
    let ids = ["A1", "A2", "A3", "B1", "B2", "B3", "C1", "C2", "C3"];
    let x: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0]).collect();
    let y: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.1]).collect();
    CharacteristicTable::from_rows(ids.iter().map(|s| s.to_string()).collect(), &x, &y).unwrap()
}

/// Every partition of `0..t` into exactly `s` nonempty blocks whose sizes
/// are all at least `min_size`, via restricted growth strings.
pub fn partitions(t: usize, s: usize, min_size: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(
        k: usize,
        t: usize,
        s: usize,
        min_size: usize,
        blocks: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if k == t {
            if blocks.len() == s && blocks.iter().all(|b| b.len() >= min_size) {
                out.push(blocks.clone());
            }
            return;
        }
        if blocks.len() + (t - k) < s {
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(k);
            rec(k + 1, t, s, min_size, blocks, out);
            blocks[b].pop();
        }
        if blocks.len() < s {
            blocks.push(vec![k]);
            rec(k + 1, t, s, min_size, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, t, s, min_size, &mut Vec::new(), &mut out);
    out
}

/// Stirling number of the second kind.
pub fn stirling2(n: usize, k: usize) -> usize {
    let mut row = vec![0usize; k + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = j * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}
