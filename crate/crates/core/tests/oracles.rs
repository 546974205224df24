mod common;

use common::{partitions, random_table, rng, stirling2};
use equiclass::assembly::build_blocks;
use equiclass::dea::{efficiency, robust_efficiency};
use equiclass::proximity::{direction_search, proximity};
use equiclass::search::descend;
use equiclass::seeding::{
    enumerate_size_multisets, line_positions, pmedian_branch_and_bound, solve_cardinality_pmedian, SizeMultiset,
};
use equiclass::solver::{dense_row, solve_conic, ConicProgram, SocConstraint, ToleranceProfile};
use equiclass::{Classification, Engine, Settings, SigmaVector, UncertaintySpec};
use nalgebra::DMatrix;
use rand::Rng;

fn pmedian_cost(d: &DMatrix<f64>, groups: &[Vec<usize>]) -> f64 {
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&m| g.iter().map(|&i| d[(i, m)]).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn sizes_of(groups: &[Vec<usize>]) -> SizeMultiset {
    SizeMultiset::new(groups.iter().map(Vec::len).collect())
}

fn enumerated_optimum(d: &DMatrix<f64>, sizes: &SizeMultiset) -> f64 {
    let t = d.nrows();
    partitions(t, sizes.sizes.len(), 1)
        .into_iter()
        .filter(|p| sizes_of(p) == *sizes)
        .map(|p| pmedian_cost(d, &p))
        .fold(f64::INFINITY, f64::min)
}

fn random_metric(r: &mut impl Rng, t: usize) -> DMatrix<f64> {
    let pts: Vec<(f64, f64)> = (0..t).map(|_| (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0))).collect();
    DMatrix::from_fn(t, t, |i, j| {
        ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()
    })
}

fn line_metric(r: &mut impl Rng, t: usize) -> DMatrix<f64> {
    let a: Vec<f64> = (0..t).map(|_| r.gen_range(0.0..1.0)).collect();
    DMatrix::from_fn(t, t, |i, j| (a[i] - a[j]).abs())
}

#[test]
fn partition_enumeration_counts() {
    assert_eq!(partitions(9, 3, 1).len(), 3025);
    assert_eq!(stirling2(9, 3), 3025);
    assert_eq!(partitions(6, 2, 1).len(), stirling2(6, 2));
}

#[test]
fn branch_and_bound_matches_enumeration_on_plane_points() {
    let mut r = rng(11);
    for t in [5, 6, 7] {
        let d = random_metric(&mut r, t);
        assert!(line_positions(&d).is_none());
        for sizes in enumerate_size_multisets(t, 2).unwrap() {
            let got = pmedian_branch_and_bound(&d, &sizes).unwrap();
            assert_eq!(sizes_of(&got), sizes);
            let best = enumerated_optimum(&d, &sizes);
            assert!(
                (pmedian_cost(&d, &got) - best).abs() <= 1e-9,
                "t={t} sizes={:?}",
                sizes.sizes
            );
        }
    }
}

#[test]
fn line_dynamic_program_matches_enumeration() {
    let mut r = rng(12);
    for t in [6, 7, 8, 9] {
        let d = line_metric(&mut r, t);
        assert!(line_positions(&d).is_some());
        for s in 2..=t / 2 {
            for sizes in enumerate_size_multisets(t, s).unwrap() {
                let got = solve_cardinality_pmedian(&d, &sizes).unwrap();
                assert_eq!(sizes_of(&got), sizes);
                let best = enumerated_optimum(&d, &sizes);
                assert!(
                    (pmedian_cost(&d, &got) - best).abs() <= 1e-12,
                    "t={t} sizes={:?}",
                    sizes.sizes
                );
            }
        }
    }
}

/// Primal `min c'x, Ax <= b, x >= 0` against its dual
/// `max -b'y, A'y + c >= 0, y >= 0`, both solved independently.
#[test]
fn random_lps_close_the_duality_gap() {
    let mut r = rng(13);
    for _ in 0..25 {
        let (m, n) = (r.gen_range(2..6), r.gen_range(2..6));
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| r.gen_range(-1.0..2.0)).collect())
            .collect();
        // a feasible primal point and a bounded objective
        let x0: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(&x0).map(|(p, q)| p * q).sum::<f64>() + r.gen_range(0.0..1.0))
            .collect();
        let c: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..2.0)).collect();

        let mut primal = ConicProgram::new(n).minimize(c.clone());
        for (row, rhs) in a.iter().zip(&b) {
            primal.add_le(dense_row(row), *rhs);
        }
        for j in 0..n {
            primal.set_bounds(j, Some(0.0), None);
        }
        let mut dual = ConicProgram::new(m).minimize(b.clone());
        for j in 0..n {
            let col: Vec<f64> = (0..m).map(|i| -a[i][j]).collect();
            dual.add_le(dense_row(&col), c[j]);
        }
        for i in 0..m {
            dual.set_bounds(i, Some(0.0), None);
        }
        let p = solve_conic(&primal, ToleranceProfile::Strict).unwrap();
        let dv = solve_conic(&dual, ToleranceProfile::Strict).unwrap();
        let (pv, x) = p.into_optimal().unwrap();
        let (dval, _) = dv.into_optimal().unwrap();
        assert!(primal.max_violation(&x) <= 1e-9);
        assert!((pv + dval).abs() <= 1e-8, "primal {pv}, dual {}", -dval);
    }
}

/// The same LP through the interior-point path (forced by a slack cone)
/// agrees with the simplex path.
#[test]
fn interior_point_agrees_with_simplex_on_dea_programs() {
    let mut r = rng(14);
    for _ in 0..10 {
        let t = r.gen_range(3..7);
        let table = random_table(&mut r, t, 2, 2);
        let all: Vec<usize> = (0..t).collect();
        let obj = r.gen_range(0..t);
        let simplex = efficiency(&table, &all, obj, &Settings::default()).unwrap();
        let zero = SigmaVector::zeros(table.num_rows());
        let mut prog = equiclass::dea::robust_program(&table, &all, obj, &zero, &UncertaintySpec::Identity).unwrap();
        prog.add_soc(SocConstraint {
            map: vec![dense_row(&[0.0])],
            offset: vec![0.0],
            scalar: vec![],
            scalar_offset: 1.0,
        });
        let ipm = solve_conic(&prog, ToleranceProfile::Strict)
            .unwrap()
            .into_optimal()
            .unwrap()
            .0;
        assert!((simplex - ipm).abs() <= 1e-6, "{simplex} vs {ipm}");
        let blocks = build_blocks(&table, &all, obj).unwrap();
        assert!(simplex <= blocks.c.dot(&blocks.eta_hat()) + 1e-9);
    }
}

fn numeric_direction(sigma: &[f64], grad: &[f64]) -> f64 {
    let n = sigma.len();
    let mut p = ConicProgram::new(n).minimize(sigma.to_vec());
    p.add_le(dense_row(&grad.iter().map(|g| -g).collect::<Vec<_>>()), 0.0);
    p.add_soc(SocConstraint {
        map: (0..n).map(|j| vec![(j, 1.0)]).collect(),
        offset: vec![0.0; n],
        scalar: vec![],
        scalar_offset: 1.0,
    });
    solve_conic(&p, ToleranceProfile::Strict)
        .unwrap()
        .into_optimal()
        .unwrap()
        .0
}

#[test]
fn direction_closed_form_matches_conic_solve() {
    let mut r = rng(15);
    for _ in 0..200 {
        let n = r.gen_range(2..6);
        let sigma: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
        let grad: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (_, closed) = direction_search(&sigma, &grad);
        let numeric = numeric_direction(&sigma, &grad);
        assert!((closed - numeric).abs() <= 1e-6, "{closed} vs {numeric}");
    }
}

/// Grid search over `[0, sigma_hat]^2` for one input and one output, using
/// that feasibility is monotone in each coordinate: the minimal feasible
/// second coordinate is nonincreasing in the first.
fn grid_proximity(table: &equiclass::CharacteristicTable, members: &[usize], hat: &[f64], h: f64) -> f64 {
    let s = Settings::default();
    let spec = UncertaintySpec::Identity;
    let axis = |top: f64| -> Vec<f64> {
        let k = (top / h).ceil() as usize;
        (0..=k).map(|i| (i as f64 * h).min(top)).collect()
    };
    let (g0, g1) = (axis(hat[0]), axis(hat[1]));
    let feasible = |a: f64, b: f64| {
        let sigma = SigmaVector::new(vec![a, b]);
        members
            .iter()
            .all(|&t| robust_efficiency(table, members, t, &sigma, &spec, &s).unwrap() >= 1.0)
    };
    let mut best = f64::INFINITY;
    let mut j = g1.len() - 1;
    for &a in &g0 {
        if !feasible(a, g1[j]) {
            continue;
        }
        while j > 0 && feasible(a, g1[j - 1]) {
            j -= 1;
        }
        best = best.min((a * a + g1[j] * g1[j]).sqrt());
    }
    best
}

#[test]
fn proximity_agrees_with_grid_search() {
    let table = equiclass::CharacteristicTable::single(&[1.0, 2.0, 3.0, 2.5], &[1.0, 1.9, 2.2, 1.5]).unwrap();
    let members = [0, 1, 2, 3];
    let p = proximity(&table, &members, &UncertaintySpec::Identity, &Settings::default()).unwrap();
    let grid = grid_proximity(&table, &members, p.sigma_hat.values(), 1e-3);
    assert!((p.estimate - grid).abs() <= 2e-3, "estimate {} grid {grid}", p.estimate);
}

#[test]
fn small_search_matches_brute_force() {
    let table =
        equiclass::CharacteristicTable::single(&[1.0, 1.5, 2.0, 1.2, 2.2, 3.0], &[1.0, 1.4, 1.7, 0.5, 0.8, 1.0])
            .unwrap();
    let engine = Engine::new(table, UncertaintySpec::Identity, Settings::default()).unwrap();
    let all = partitions(6, 2, 2);
    let totals = engine.totals(&all).unwrap();
    let best = totals.iter().cloned().fold(f64::INFINITY, f64::min);
    let (result, history) = equiclass::classify(&engine, 2).unwrap();
    assert!(history.windows(2).all(|w| w[1].total.unwrap() < w[0].total.unwrap()));
    assert!(
        result.total.unwrap() <= best + 1e-6,
        "search {:?} vs brute force {best}",
        result.total
    );
}

#[test]
fn cached_history_matches_fresh_engine() {
    let mut r = rng(16);
    let table = random_table(&mut r, 6, 1, 1);
    let settings = Settings::default();
    let engine = Engine::new(table.clone(), UncertaintySpec::Identity, settings.clone()).unwrap();
    let seed = Classification::new(vec![vec![0, 1, 2], vec![3, 4, 5]]);
    let history = descend(&engine, &seed).unwrap();
    for step in &history {
        for (members, &p) in step.categories.iter().zip(step.proximity.as_ref().unwrap()) {
            let fresh = proximity(&table, members, &UncertaintySpec::Identity, &settings).unwrap();
            assert_eq!(fresh.estimate, p);
        }
    }
}
