mod common;

use proptest::prelude::*;
use raoco::{IntegralSet, Threshold, ThresholdPotential, WtpFunction};

#[test]
fn hand_evaluation() {
    let f = WtpFunction::new(
        3,
        vec![
            ThresholdPotential::new(2.0, Threshold::Finite(1.0), &[1.0, 1.0, 0.0]).unwrap(),
            ThresholdPotential::new(0.5, Threshold::Infinite, &[0.0, 2.0, 4.0]).unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(f.eval_integral(&IntegralSet::empty(3)).unwrap(), 0.0);
    assert_eq!(f.eval_integral(&IntegralSet::from_indices(3, &[0, 1]).unwrap()).unwrap(), 3.0);
    assert_eq!(f.eval_integral(&IntegralSet::full(3)).unwrap(), 5.0);
    assert!((f.eval_relaxed(&[0.25, 0.25, 0.5]).unwrap() - (1.0 + 0.25 + 1.0)).abs() < 1e-12);
}

#[test]
fn rejects_invalid_potentials() {
    assert!(ThresholdPotential::new(-1.0, Threshold::Infinite, &[1.0]).is_err());
    assert!(ThresholdPotential::new(1.0, Threshold::Finite(-0.5), &[1.0]).is_err());
    assert!(ThresholdPotential::new(1.0, Threshold::Infinite, &[-1.0]).is_err());
    assert!(ThresholdPotential::new(1.0, Threshold::Infinite, &[f64::NAN]).is_err());
    let p = ThresholdPotential::new(1.0, Threshold::Infinite, &[1.0, 1.0]).unwrap();
    assert!(WtpFunction::new(1, vec![p]).is_err());
    assert!(WtpFunction::from_quadratic(&[1.0, 1.0], &[vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
}

#[test]
fn coverage_counts_distinct_covered_sets() {
    let f = WtpFunction::from_weighted_coverage(4, &[(3.0, vec![0, 1]), (2.0, vec![1, 2]), (1.0, vec![3])]).unwrap();
    let eval = |s: &[usize]| f.eval_integral(&IntegralSet::from_indices(4, s).unwrap()).unwrap();
    assert_eq!(eval(&[1]), 5.0);
    assert_eq!(eval(&[0]), 3.0);
    assert_eq!(eval(&[0, 2]), 5.0);
    assert_eq!(eval(&[0, 1, 2, 3]), 6.0);
}

fn naive_facility(w: &[Vec<f64>], p: &[f64], s: &[bool]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(v2, pv)| pv * (0..w.len()).filter(|&v| s[v]).map(|v| w[v][v2]).fold(0.0, f64::max))
        .sum()
}

fn naive_quadratic(h: &[f64], hm: &[Vec<f64>], s: &[bool]) -> f64 {
    let x: Vec<f64> = s.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let n = h.len();
    let lin: f64 = (0..n).map(|i| h[i] * x[i]).sum();
    let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[i] * hm[i][j] * x[j]).sum();
    lin + 0.5 * quad
}

fn quadratic() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (2usize..=6).prop_flat_map(|n| {
        (prop::collection::vec(0.0f64..5.0, n), prop::collection::vec(-1.0f64..=0.0, n * n)).prop_map(move |(h, raw)| {
            let mut hm = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    hm[i][j] = raw[i * n + j];
                    hm[j][i] = raw[i * n + j];
                }
            }
            let mut h = h;
            for i in 0..n {
                let deficit = -(h[i] + hm[i].iter().sum::<f64>());
                if deficit > 0.0 {
                    h[i] += deficit;
                }
            }
            (h, hm)
        })
    })
}

proptest! {
    #[test]
    fn relaxation_agrees_on_integral_points(f in (1usize..=8).prop_flat_map(|n| common::wtp(n, 6)), bits in any::<u8>()) {
        let x: Vec<bool> = (0..f.n()).map(|i| bits >> i & 1 == 1).collect();
        let v: Vec<f64> = x.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        prop_assert!((f.eval_mask(&x) - f.eval_relaxed(&v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn relaxation_is_concave(
        (f, a, b) in (1usize..=8).prop_flat_map(|n| (common::wtp(n, 6), common::point(n, n), common::point(n, n))),
        t in 0.0f64..=1.0,
    ) {
        let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| t * p + (1.0 - t) * q).collect();
        let chord = t * f.eval_relaxed(&a).unwrap() + (1.0 - t) * f.eval_relaxed(&b).unwrap();
        prop_assert!(f.eval_relaxed(&mid).unwrap() >= chord - 1e-9);
    }

    #[test]
    fn set_function_is_monotone_submodular(f in (2usize..=8).prop_flat_map(|n| common::wtp(n, 6)), a in any::<u8>(), b in any::<u8>()) {
        let n = f.n();
        let mk = |bits: u8| -> Vec<bool> { (0..n).map(|i| bits >> i & 1 == 1).collect() };
        let (sa, sb) = (mk(a), mk(b));
        let union: Vec<bool> = sa.iter().zip(&sb).map(|(p, q)| *p || *q).collect();
        let inter: Vec<bool> = sa.iter().zip(&sb).map(|(p, q)| *p && *q).collect();
        prop_assert!(f.eval_mask(&sa) + f.eval_mask(&sb) >= f.eval_mask(&union) + f.eval_mask(&inter) - 1e-9);
        prop_assert!(f.eval_mask(&union) >= f.eval_mask(&sa) - 1e-12);
        prop_assert!(f.eval_mask(&vec![false; n]) == 0.0);
    }

    #[test]
    fn facility_location_matches_max_form(
        (w, p) in (1usize..=5, 1usize..=4).prop_flat_map(|(n, c)| (
            prop::collection::vec(prop::collection::vec(0.0f64..3.0, c), n),
            prop::collection::vec(0.01f64..1.0, c),
        )),
        bits in any::<u8>(),
    ) {
        let s: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|v| v / s).collect();
        let f = WtpFunction::from_facility_location(&w, &p).unwrap();
        let mask: Vec<bool> = (0..w.len()).map(|i| bits >> i & 1 == 1).collect();
        prop_assert!((f.eval_mask(&mask) - naive_facility(&w, &p, &mask)).abs() < 1e-9);
    }

    #[test]
    fn quadratic_matches_polynomial((h, hm) in quadratic(), bits in any::<u8>()) {
        let f = WtpFunction::from_quadratic(&h, &hm).unwrap();
        let mask: Vec<bool> = (0..h.len()).map(|i| bits >> i & 1 == 1).collect();
        prop_assert!((f.eval_mask(&mask) - naive_quadratic(&h, &hm, &mask)).abs() < 1e-9);
    }
}
