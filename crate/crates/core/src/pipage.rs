//! Randomized pipage rounding onto `X_ℓ = {x ∈ {0,1}^n : Σx ≤ ℓ}`.
//!
//! While two or more coordinates are fractional, the two lowest-indexed ones
//! `(i, j)` are paired. With `ε₁ = min(1 − x_i, x_j)` and
//! `ε₂ = min(x_i, 1 − x_j)`, a uniform draw `u` from the generator decides the
//! move: if `u < ε₂/(ε₁+ε₂)` mass `ε₁` moves from `j` to `i`, otherwise `ε₂`
//! moves from `i` to `j`. Each move makes at least one of the pair integral
//! and keeps `E[x] = x̃`. A last lone fractional coordinate goes to 1 when the
//! budget still has room and to 0 otherwise.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::wtp::IntegralSet;

/// Coordinates closer than this to 0 or 1 count as integral.
pub const INTEGRAL_TOL: f64 = 1e-9;

/// Generator used for rounding.
pub type RoundingRng = Rng;

pub fn is_integral(v: f64) -> bool {
    v <= INTEGRAL_TOL || v >= 1.0 - INTEGRAL_TOL
}

/// Outcome of one pairing move.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairMove {
    /// Probability of moving mass towards `i`.
    pub p_up: f64,
    /// `(x_i, x_j)` after moving mass towards `i`.
    pub up: (f64, f64),
    /// `(x_i, x_j)` after moving mass towards `j`.
    pub down: (f64, f64),
}

/// Both possible results of pairing `a = x_i` with `b = x_j`.
pub fn pair_move(a: f64, b: f64) -> PairMove {
    let e1 = (1.0 - a).min(b);
    let e2 = a.min(1.0 - b);
    let up = if 1.0 - a <= b { (1.0, b - e1) } else { (a + e1, 0.0) };
    let down = if a <= 1.0 - b { (0.0, b + e2) } else { (a - e2, 1.0) };
    PairMove { p_up: e2 / (e1 + e2), up, down }
}

fn validate(x: &[f64], ell: usize) -> Result<()> {
    let mut mass = 0.0;
    for (i, &v) in x.iter().enumerate() {
        if !(-INTEGRAL_TOL..=1.0 + INTEGRAL_TOL).contains(&v) {
            return Err(Error::OutOfBox { index: i, value: v });
        }
        mass += v;
    }
    if mass > ell as f64 + INTEGRAL_TOL {
        return Err(Error::BudgetExceeded { mass, ell: ell as f64 });
    }
    Ok(())
}

fn snap(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v <= INTEGRAL_TOL {
            *v = 0.0;
        } else if *v >= 1.0 - INTEGRAL_TOL {
            *v = 1.0;
        }
    }
}

fn lowest_two_fractional(x: &[f64]) -> (Option<usize>, Option<usize>) {
    let mut it = x.iter().enumerate().filter(|(_, &v)| !is_integral(v)).map(|(i, _)| i);
    (it.next(), it.next())
}

fn finish_lone(x: &mut [f64], i: usize, ell: usize) {
    let ones = x.iter().filter(|&&v| v == 1.0).count();
    x[i] = if ones < ell { 1.0 } else { 0.0 };
}

/// Round `x̃ ∈ X̃_ℓ` to a random point of `X_ℓ`.
pub fn round(xt: &[f64], ell: usize, rng: &mut RoundingRng) -> Result<IntegralSet> {
    validate(xt, ell)?;
    let mut x = xt.to_vec();
    snap(&mut x);
    loop {
        match lowest_two_fractional(&x) {
            (None, _) => break,
            (Some(i), None) => {
                finish_lone(&mut x, i, ell);
                break;
            }
            (Some(i), Some(j)) => {
                let mv = pair_move(x[i], x[j]);
                let u: f64 = rng.random();
                let (a, b) = if u < mv.p_up { mv.up } else { mv.down };
                x[i] = a;
                x[j] = b;
                snap(&mut x);
            }
        }
    }
    Ok(IntegralSet::from_bools(x.iter().map(|&v| v == 1.0).collect()))
}

/// Exact output distribution of [`round`], by walking the whole trajectory
/// tree. Sets are keyed by their membership vector.
pub fn distribution(xt: &[f64], ell: usize) -> Result<BTreeMap<Vec<bool>, f64>> {
    validate(xt, ell)?;
    let mut x = xt.to_vec();
    snap(&mut x);
    let mut out = BTreeMap::new();
    walk(x, ell, 1.0, &mut out);
    Ok(out)
}

fn walk(mut x: Vec<f64>, ell: usize, p: f64, out: &mut BTreeMap<Vec<bool>, f64>) {
    if p == 0.0 {
        return;
    }
    match lowest_two_fractional(&x) {
        (None, _) => {
            *out.entry(x.iter().map(|&v| v == 1.0).collect()).or_insert(0.0) += p;
        }
        (Some(i), None) => {
            finish_lone(&mut x, i, ell);
            *out.entry(x.iter().map(|&v| v == 1.0).collect()).or_insert(0.0) += p;
        }
        (Some(i), Some(j)) => {
            let mv = pair_move(x[i], x[j]);
            let mut y = x.clone();
            (y[i], y[j]) = mv.up;
            snap(&mut y);
            walk(y, ell, p * mv.p_up, out);
            (x[i], x[j]) = mv.down;
            snap(&mut x);
            walk(x, ell, p * (1.0 - mv.p_up), out);
        }
    }
}
