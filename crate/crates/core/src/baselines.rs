//! Reference algorithms: Random, One-stage OGA, Replacement-Greedy,
//! Continuous-Optimization and offline RAOCO.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matroid::{Matroid, MatroidKind};
use crate::oco::project_capped_simplex;
use crate::oracle::{dedup_functions, offline_opt_fractional_point};
use crate::pipage;
use crate::rng::Rng;
use crate::wtp::{IntegralSet, WtpFunction};

/// Default `ε` of Continuous-Optimization.
pub const CO_EPSILON: f64 = 0.25;

/// Uniform `ℓ`-subset of `[n]` by a partial Fisher–Yates shuffle: for
/// `i = 0..ℓ`, swap position `i` with a uniform position in `i..n`.
pub fn random_policy(n: usize, ell: usize, rng: &mut Rng) -> Result<IntegralSet> {
    if ell > n {
        return Err(Error::BudgetExceeded { mass: ell as f64, ell: n as f64 });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..ell {
        let j = rng.random_range(i..n);
        perm.swap(i, j);
    }
    IntegralSet::from_indices(n, &perm[..ell])
}

/// The second-stage matroid One-stage OGA pretends to face: Uniform(ℓ).
pub fn one_stage_matroid(n: usize, ell: usize) -> Result<Matroid> {
    Matroid::uniform(n, ell)
}

fn swap_gain(f: &WtpFunction, m: &Matroid, a: &[usize], mask: &mut [bool], base: f64, e: usize) -> (f64, Option<usize>) {
    let mut best = (f64::NEG_INFINITY, None);
    for (pos, &old) in a.iter().enumerate() {
        let mut trial: Vec<usize> = a.to_vec();
        trial[pos] = e;
        if !m.is_independent_indices(&trial) {
            continue;
        }
        mask[old] = false;
        mask[e] = true;
        let v = f.eval_mask(mask) - base;
        mask[e] = false;
        mask[old] = true;
        if v > best.0 {
            best = (v, Some(old));
        }
    }
    best
}

/// `∇(e, A)` and the element `e` would replace (`None` for an insertion or
/// when nothing helps).
pub fn replacement_gain(f: &WtpFunction, m: &Matroid, a: &[usize], e: usize) -> (f64, Option<usize>) {
    let mut mask = vec![false; f.n()];
    for &i in a {
        mask[i] = true;
    }
    let base = f.eval_mask(&mask);
    if a.contains(&e) {
        return (0.0, None);
    }
    let mut with = a.to_vec();
    with.push(e);
    if m.is_independent_indices(&with) {
        mask[e] = true;
        return (f.eval_mask(&mask) - base, None);
    }
    let (g, old) = swap_gain(f, m, a, &mut mask, base, e);
    if g > 0.0 {
        (g, old)
    } else {
        (0.0, None)
    }
}

/// Replacement-Greedy over the sequence `fs`. Identical functions share one
/// per-function solution `B_t`, weighted by multiplicity. The argmax ranges
/// over elements not yet in `S` with ties to the lowest index, so `|S| = ℓ`.
pub fn replacement_greedy(fs: &[&WtpFunction], m: &Matroid, ell: usize) -> Result<IntegralSet> {
    let n = m.n();
    if ell > n {
        return Err(Error::BudgetExceeded { mass: ell as f64, ell: n as f64 });
    }
    for f in fs {
        if f.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.n() });
        }
    }
    let distinct = dedup_functions(fs);
    let mut solutions: Vec<Vec<usize>> = vec![Vec::new(); distinct.len()];
    let mut chosen = vec![false; n];
    for _ in 0..ell {
        let mut best: Option<(f64, usize)> = None;
        for e in (0..n).filter(|&e| !chosen[e]) {
            let total: f64 = distinct
                .iter()
                .zip(&solutions)
                .map(|((f, mult), b)| *mult as f64 * replacement_gain(f, m, b, e).0)
                .sum();
            if best.is_none_or(|(v, _)| total > v) {
                best = Some((total, e));
            }
        }
        let Some((_, e)) = best else { break };
        chosen[e] = true;
        for ((f, _), b) in distinct.iter().zip(solutions.iter_mut()) {
            let (gain, old) = replacement_gain(f, m, b, e);
            if gain > 0.0 {
                if let Some(old) = old {
                    b.retain(|&v| v != old);
                }
                b.push(e);
                debug_assert!(m.is_independent_indices(b));
            }
        }
    }
    Ok(IntegralSet::from_bools(chosen))
}

/// `ε′ = k^{−(1/2 − ε)}`.
pub fn co_shrink(k: usize, eps: f64) -> f64 {
    (k as f64).powf(-(0.5 - eps))
}

/// Continuous-Optimization rounding of a fractional optimum: scale by
/// `1 − ε′`, keep each element independently with the scaled probability,
/// and fall back to a uniform `ℓ`-subset when more than `ℓ` survive.
pub fn co_round(xstar: &[f64], k: usize, ell: usize, eps: f64, rng: &mut Rng) -> Result<IntegralSet> {
    if k <= 1 {
        return Err(Error::Unsupported("Continuous-Optimization requires k > 1".into()));
    }
    let scale = 1.0 - co_shrink(k, eps);
    let kept: Vec<bool> = xstar.iter().map(|&v| rng.random::<f64>() < scale * v.clamp(0.0, 1.0)).collect();
    if kept.iter().filter(|&&b| b).count() <= ell {
        Ok(IntegralSet::from_bools(kept))
    } else {
        random_policy(xstar.len(), ell, rng)
    }
}

/// The fractional point Continuous-Optimization and offline RAOCO round.
pub fn joint_fractional_point(fs: &[&WtpFunction], m: &Matroid, ell: usize) -> Result<Vec<f64>> {
    let (_, x) = offline_opt_fractional_point(fs, m, ell)?;
    Ok(project_capped_simplex(&x, ell as f64))
}

pub fn continuous_optimization(fs: &[&WtpFunction], m: &Matroid, ell: usize, eps: f64, rng: &mut Rng) -> Result<IntegralSet> {
    let k = match m.kind() {
        MatroidKind::Uniform { k } => *k,
        MatroidKind::Partition { .. } => {
            return Err(Error::Unsupported("Continuous-Optimization needs a uniform second stage".into()))
        }
    };
    if k <= 1 {
        return Err(Error::Unsupported("Continuous-Optimization requires k > 1".into()));
    }
    let x = joint_fractional_point(fs, m, ell)?;
    co_round(&x, k, ell, eps, rng)
}

/// Maximize `Σ_t F̃_t` over `X̃_ℓ` and pipage-round the maximizer.
pub fn offline_raoco(fs: &[&WtpFunction], m: &Matroid, ell: usize, rng: &mut Rng) -> Result<IntegralSet> {
    let x = joint_fractional_point(fs, m, ell)?;
    pipage::round(&x, ell, rng)
}
