//! Cardinality-constrained p-median: exact line solver and branch and
//! bound on a general distance matrix.

use equiclass::seeding::{enumerate_size_multisets, pmedian_branch_and_bound, solve_cardinality_pmedian};
use nalgebra::DMatrix;

fn main() -> equiclass::Result<()> {
    let line: [f64; 7] = [0.0, 0.1, 0.15, 0.9, 1.0, 1.1, 2.0];
    let d = DMatrix::from_fn(line.len(), line.len(), |i, j| (line[i] - line[j]).abs());
    for sizes in enumerate_size_multisets(line.len(), 3)? {
        let groups = solve_cardinality_pmedian(&d, &sizes)?;
        println!("sizes {:?}: {:?}", sizes.sizes, groups);
    }

    let pts: [(f64, f64); 6] = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (5.0, 5.0), (5.0, 6.0), (6.0, 5.0)];
    let d = DMatrix::from_fn(pts.len(), pts.len(), |i, j| {
        let (a, b) = (pts[i], pts[j]);
        ((a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1)).sqrt()
    });
    for sizes in enumerate_size_multisets(pts.len(), 2)? {
        println!(
            "plane, sizes {:?}: {:?}",
            sizes.sizes,
            pmedian_branch_and_bound(&d, &sizes)?
        );
    }
    Ok(())
}
