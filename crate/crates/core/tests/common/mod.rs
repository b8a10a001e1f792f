#![allow(dead_code)]

use proptest::prelude::*;
use raoco::{IntegralSet, Matroid, Threshold, ThresholdPotential, WtpFunction};

fn potential(n: usize) -> impl Strategy<Value = ThresholdPotential> {
    (
        0.5f64..2.0,
        prop::option::weighted(0.8, 0.2f64..2.0),
        prop::collection::vec(prop::option::weighted(0.5, 0.1f64..1.5), n),
        0..n,
    )
        .prop_map(move |(c, b, w, forced)| {
            let mut w: Vec<f64> = w.into_iter().map(|v| v.unwrap_or(0.0)).collect();
            if w.iter().all(|&v| v == 0.0) {
                w[forced] = 1.0;
            }
            let b = b.map(Threshold::Finite).unwrap_or(Threshold::Infinite);
            ThresholdPotential::new(c, b, &w).unwrap()
        })
}

/// WTP function on `[n]` with 1 to `max_g` random potentials.
pub fn wtp(n: usize, max_g: usize) -> impl Strategy<Value = WtpFunction> {
    prop::collection::vec(potential(n), 1..=max_g).prop_map(move |p| WtpFunction::new(n, p).unwrap())
}

/// Uniform of rank 1..=3 or a two-part partition matroid.
pub fn matroid(n: usize) -> BoxedStrategy<Matroid> {
    let uniform = (1..=3.min(n)).prop_map(move |k| Matroid::uniform(n, k).unwrap());
    if n < 2 {
        return uniform.boxed();
    }
    let partition = (1..n, 1usize..=2, 1usize..=2)
        .prop_map(move |(cut, a, b)| {
            Matroid::partition(n, vec![(0..cut).collect(), (cut..n).collect()], vec![a, b]).unwrap()
        });
    prop_oneof![uniform, partition].boxed()
}

/// A point of `[0,1]^n` with `Σ ≤ ell`.
pub fn point(n: usize, ell: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.0f64..=1.0, n), 0.1f64..=1.0).prop_map(move |(v, frac)| {
        let s: f64 = v.iter().sum();
        let budget = ell as f64 * frac;
        if s <= budget {
            v
        } else {
            v.iter().map(|a| (a * budget / s).min(1.0)).collect()
        }
    })
}

pub fn set(n: usize) -> impl Strategy<Value = IntegralSet> {
    prop::collection::vec(any::<bool>(), n).prop_map(IntegralSet::from_bools)
}

/// Brute-force `max { f(y) : y ⊆ x, y ∈ I }`.
pub fn brute_second_stage(f: &WtpFunction, m: &Matroid, x: &IntegralSet) -> f64 {
    let supp = x.support();
    let mut best: f64 = 0.0;
    for bits in 0u64..1 << supp.len() {
        let members: Vec<usize> = (0..supp.len()).filter(|&i| bits >> i & 1 == 1).map(|i| supp[i]).collect();
        if m.is_independent_indices(&members) {
            best = best.max(f.eval_integral(&IntegralSet::from_indices(f.n(), &members).unwrap()).unwrap());
        }
    }
    best
}

/// All subsets of `[n]` as membership vectors.
pub fn all_masks(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}
