mod common;

use common::{random_table, rng};
use equiclass::dea::{efficiency, robust_efficiency_raw};
use equiclass::proximity::{direction_search, step_bound};
use equiclass::search::neighbors;
use equiclass::seeding::enumerate_size_multisets;
use equiclass::{partition_is_valid, Classification, Settings, SigmaVector, UncertaintySpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Partitions of `t` into exactly `s` parts, each at least 2.
fn count_size_partitions(t: usize, s: usize, min_part: usize) -> usize {
    if s == 0 {
        return usize::from(t == 0);
    }
    (min_part..=t / s).map(|p| count_size_partitions(t - p, s - 1, p)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn efficiency_is_invariant_under_object_relabelling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.gen_range(2..=7);
        let (n, m) = (r.gen_range(1..=2), r.gen_range(1..=2));
        let table = random_table(&mut r, t, n, m);
        let mut order: Vec<usize> = (0..t).collect();
        order.shuffle(&mut r);
        let permuted = table.permuted(&order).unwrap();
        let s = Settings::default();
        let all: Vec<usize> = (0..t).collect();
        for (new, &old) in order.iter().enumerate() {
            let a = efficiency(&table, &all, old, &s).unwrap();
            let b = efficiency(&permuted, &all, new, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-7, "object {old}: {a} vs {b}");
        }
    }

    #[test]
    fn robust_score_is_monotone_in_sigma(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.gen_range(2..=6);
        let (n, m) = (r.gen_range(1..=2), r.gen_range(1..=2));
        let table = random_table(&mut r, t, n, m);
        let rows = table.num_rows();
        let all: Vec<usize> = (0..t).collect();
        let obj = r.gen_range(0..t);
        let lo: Vec<f64> = (0..rows).map(|_| r.gen_range(0.0..0.5)).collect();
        let hi: Vec<f64> = lo.iter().map(|v| v + r.gen_range(0.0..0.5)).collect();
        let s = Settings::default();
        let spec = UncertaintySpec::Identity;
        let a = robust_efficiency_raw(&table, &all, obj, &SigmaVector::new(lo), &spec, &s).unwrap();
        let b = robust_efficiency_raw(&table, &all, obj, &SigmaVector::new(hi), &spec, &s).unwrap();
        prop_assert!(a <= b + 1e-6, "{a} > {b}");
        prop_assert!(b <= 1.0 + 1e-9);
    }

    #[test]
    fn direction_is_feasible_and_beats_random_feasible_directions(
        sigma in prop::collection::vec(0.0f64..2.0, 2..6),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let grad: Vec<f64> = sigma.iter().map(|_| r.gen_range(-1.0..1.0)).collect();
        let (d, value) = direction_search(&sigma, &grad);
        let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(norm <= 1.0 + 1e-12);
        let dg: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
        prop_assert!(dg >= -1e-9);
        let ds: f64 = d.iter().zip(&sigma).map(|(a, b)| a * b).sum();
        prop_assert!((ds - value).abs() <= 1e-12);
        for _ in 0..200 {
            let mut e: Vec<f64> = sigma.iter().map(|_| r.gen_range(-1.0..1.0)).collect();
            let en = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            e.iter_mut().for_each(|v| *v /= en.max(1.0));
            let eg: f64 = e.iter().zip(&grad).map(|(a, b)| a * b).sum();
            if eg >= 0.0 {
                let es: f64 = e.iter().zip(&sigma).map(|(a, b)| a * b).sum();
                prop_assert!(value <= es + 1e-12);
            }
        }
    }

    #[test]
    fn step_bound_respects_floor_and_nonnegativity(
        sigma in prop::collection::vec(0.01f64..2.0, 2..5),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let s = SigmaVector::new(sigma.clone());
        let mut d: Vec<f64> = sigma.iter().map(|_| r.gen_range(-1.0..0.2)).collect();
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.iter_mut().for_each(|v| *v /= dn);
        let alpha = step_bound(&s, &d, s.norm());
        prop_assert!(alpha >= 0.0);
        let next: Vec<f64> = sigma.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
        prop_assert!(next.iter().all(|v| *v >= -1e-12));
        let floor = s.norm() / (sigma.len() as f64).sqrt();
        let nn = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(nn >= floor - 1e-9, "{nn} < {floor}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn size_multisets_are_canonical_and_complete(t in 2usize..30, s in 1usize..6) {
        match enumerate_size_multisets(t, s) {
            Err(_) => prop_assert!(t < 2 * s),
            Ok(all) => {
                prop_assert_eq!(all.len(), count_size_partitions(t, s, 2));
                for m in &all {
                    prop_assert_eq!(m.total(), t);
                    prop_assert_eq!(m.sizes.len(), s);
                    prop_assert!(m.sizes.iter().all(|&p| p >= 2));
                    prop_assert!(m.sizes.windows(2).all(|w| w[0] <= w[1]));
                }
                let mut sorted = all.clone();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), all.len());
            }
        }
    }

    #[test]
    fn neighbors_are_valid_partitions(seed in any::<u64>(), t in 4usize..14, s in 2usize..4) {
        prop_assume!(t >= s);
        let mut r = rng(seed);
        let mut labels: Vec<usize> = (0..t).map(|k| if k < s { k } else { r.gen_range(0..s) }).collect();
        labels.shuffle(&mut r);
        let mut cats = vec![Vec::new(); s];
        for (obj, &c) in labels.iter().enumerate() {
            cats[c].push(obj);
        }
        let c = Classification::new(cats);
        prop_assert!(partition_is_valid(&c, t, s));
        let expected: usize = c.categories.iter().filter(|m| m.len() >= 2).map(|m| m.len() * (s - 1)).sum();
        let n = neighbors(&c);
        prop_assert_eq!(n.len(), expected);
        for x in &n {
            prop_assert!(partition_is_valid(x, t, s));
            prop_assert!(!x.same_partition(&c));
        }
    }
}
