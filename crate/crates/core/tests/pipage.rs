mod common;

use proptest::prelude::*;
use raoco::pipage::{distribution, pair_move, round};
use raoco::rng::from_seed;

fn face_point(n: usize, ell: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..0.95, n).prop_map(move |y| {
        let s: f64 = y.iter().sum();
        let target = ell as f64;
        if s > target {
            y.iter().map(|a| a * target / s).collect()
        } else {
            let room: f64 = y.iter().map(|a| 0.999 - a).sum();
            let t = (target - s) / room;
            y.iter().map(|a| a + t * (0.999 - a)).collect()
        }
    })
}

#[test]
fn integral_input_is_returned_unchanged() {
    let mut r = from_seed(0);
    let x = [1.0, 0.0, 1.0, 0.0];
    assert_eq!(round(&x, 2, &mut r).unwrap().support(), vec![0, 2]);
    assert_eq!(distribution(&x, 2).unwrap().len(), 1);
}

#[test]
fn rejects_points_outside_the_budget_polytope() {
    let mut r = from_seed(0);
    assert!(round(&[0.9, 0.9, 0.9], 2, &mut r).is_err());
    assert!(round(&[1.2, 0.0], 2, &mut r).is_err());
    assert!(round(&[-0.1, 0.5], 2, &mut r).is_err());
}

#[test]
fn two_halves_split_evenly() {
    let d = distribution(&[0.5, 0.5], 1).unwrap();
    assert_eq!(d.len(), 2);
    assert!(d.values().all(|&p| (p - 0.5).abs() < 1e-15));
}

proptest! {
    #[test]
    fn pair_move_preserves_mass_and_mean(a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let mv = pair_move(a, b);
        prop_assert!((mv.up.0 + mv.up.1 - a - b).abs() < 1e-12);
        prop_assert!((mv.down.0 + mv.down.1 - a - b).abs() < 1e-12);
        let mean_i = mv.p_up * mv.up.0 + (1.0 - mv.p_up) * mv.down.0;
        prop_assert!((mean_i - a).abs() < 1e-12);
        let ends = [mv.up.0, mv.up.1, mv.down.0, mv.down.1];
        prop_assert!(ends.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        prop_assert!([mv.up.0, mv.up.1].iter().any(|&v| v == 0.0 || v == 1.0));
        prop_assert!([mv.down.0, mv.down.1].iter().any(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn exact_marginals_on_the_face((x, ell) in (2usize..=9).prop_flat_map(|n| (1..n).prop_flat_map(move |ell| (face_point(n, ell), Just(ell))))) {
        let d = distribution(&x, ell).unwrap();
        prop_assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-9);
        for (i, &xi) in x.iter().enumerate() {
            let m: f64 = d.iter().filter(|(s, _)| s[i]).map(|(_, p)| p).sum();
            prop_assert!((m - xi).abs() < 1e-9, "coordinate {}: {} vs {}", i, m, xi);
        }
        prop_assert!(d.keys().all(|s| s.iter().filter(|&&b| b).count() == ell));
    }

    #[test]
    fn samples_are_feasible_and_lie_in_the_support((x, ell) in (1usize..=9).prop_flat_map(|n| (1..=n).prop_flat_map(move |ell| (common::point(n, ell), Just(ell)))), seed in any::<u64>()) {
        let d = distribution(&x, ell).unwrap();
        let mut r = from_seed(seed);
        for _ in 0..20 {
            let s = round(&x, ell, &mut r).unwrap();
            prop_assert!(s.count() <= ell);
            prop_assert!(d.contains_key(s.as_slice()));
            for i in 0..x.len() {
                if x[i] == 0.0 { prop_assert!(!s.contains(i)); }
                if x[i] == 1.0 { prop_assert!(s.contains(i)); }
            }
        }
    }

    #[test]
    fn same_seed_same_set(x in common::point(8, 3), seed in any::<u64>()) {
        let a = round(&x, 3, &mut from_seed(seed)).unwrap();
        let b = round(&x, 3, &mut from_seed(seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}
