//! Online policies over `X̃_ℓ = {x ∈ [0,1]^n : Σx ≤ ℓ}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default learning rate.
pub const DEFAULT_ETA: f64 = 0.1;

const SUM_TOL: f64 = 1e-10;
const LOG_FLOOR: f64 = 1e-12;

/// Euclidean projection onto `{x ∈ [0,1]^n : Σx ≤ ℓ}`.
///
/// Clips to the box; if the budget is violated, bisects the shift `θ` in
/// `Σ clip(v − θ, 0, 1) = ℓ`. The upper end of the final bracket is used so
/// that the returned sum never exceeds `ℓ`.
pub fn project_capped_simplex(v: &[f64], ell: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&a| a.clamp(0.0, 1.0)).collect();
    if clipped.iter().sum::<f64>() <= ell {
        return clipped;
    }
    let shifted = |theta: f64| -> f64 { v.iter().map(|&a| (a - theta).clamp(0.0, 1.0)).sum() };
    let mut lo = 0.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = shifted(mid);
        if s > ell {
            lo = mid;
        } else {
            hi = mid;
        }
        if (shifted(hi) - ell).abs() <= SUM_TOL || hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    v.iter().map(|&a| (a - hi).clamp(0.0, 1.0)).collect()
}

/// Maximizer of `η·G·x − Σ x_i ln x_i` over `X̃_ℓ`.
pub fn entropic_leader(g_sum: &[f64], eta: f64, ell: f64) -> Vec<f64> {
    let at = |theta: f64| -> Vec<f64> {
        g_sum.iter().map(|&g| (eta * g - 1.0 - theta).exp().min(1.0)).collect()
    };
    let free = at(0.0);
    if free.iter().sum::<f64>() <= ell {
        return free;
    }
    let total = |theta: f64| -> f64 { at(theta).iter().sum() };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while total(hi) > ell {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > ell {
            lo = mid;
        } else {
            hi = mid;
        }
        if (total(hi) - ell).abs() <= SUM_TOL || hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    at(hi)
}

/// Negative entropy `Σ x ln x` with `0 ln 0 = 0` and a floor inside the log.
pub fn neg_entropy(x: &[f64]) -> f64 {
    x.iter().map(|&v| if v <= 0.0 { 0.0 } else { v * v.max(LOG_FLOOR).ln() }).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    Oga,
    FtrlL2,
    FtrlEntropy,
}

#[derive(Clone, Debug, PartialEq)]
enum Variant {
    Oga { x: Vec<f64> },
    FtrlL2 { g_sum: Vec<f64> },
    FtrlEntropy { g_sum: Vec<f64> },
}

/// Single-owner learner state; `current()` is always in `X̃_ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyState {
    variant: Variant,
    current: Vec<f64>,
    eta: f64,
    ell: f64,
    n: usize,
}

impl PolicyState {
    /// Start at the all-`ℓ/n` point.
    pub fn new(kind: PolicyKind, n: usize, ell: f64, eta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate must be positive, got {eta}")));
        }
        if !(ell > 0.0) {
            return Err(Error::InvalidConfig(format!("budget must be positive, got {ell}")));
        }
        let start = vec![(ell / n as f64).min(1.0); n];
        let variant = match kind {
            PolicyKind::Oga => Variant::Oga { x: start.clone() },
            PolicyKind::FtrlL2 => Variant::FtrlL2 { g_sum: vec![0.0; n] },
            PolicyKind::FtrlEntropy => Variant::FtrlEntropy { g_sum: vec![0.0; n] },
        };
        Ok(Self { variant, current: start, eta, ell, n })
    }

    pub fn kind(&self) -> PolicyKind {
        match self.variant {
            Variant::Oga { .. } => PolicyKind::Oga,
            Variant::FtrlL2 { .. } => PolicyKind::FtrlL2,
            Variant::FtrlEntropy { .. } => PolicyKind::FtrlEntropy,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// The decision for the next round.
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Accumulated supergradients, for the FTRL variants.
    pub fn gradient_sum(&self) -> Option<&[f64]> {
        match &self.variant {
            Variant::Oga { .. } => None,
            Variant::FtrlL2 { g_sum } | Variant::FtrlEntropy { g_sum } => Some(g_sum),
        }
    }

    /// Feed the supergradient observed at `current()` and move to the next
    /// iterate.
    pub fn step(&mut self, g: &[f64]) -> Result<&[f64]> {
        if g.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: g.len() });
        }
        let (eta, ell) = (self.eta, self.ell);
        self.current = match &mut self.variant {
            Variant::Oga { x } => {
                let moved: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + eta * b).collect();
                *x = project_capped_simplex(&moved, ell);
                x.clone()
            }
            Variant::FtrlL2 { g_sum } => {
                add_into(g_sum, g);
                let scaled: Vec<f64> = g_sum.iter().map(|v| eta * v).collect();
                project_capped_simplex(&scaled, ell)
            }
            Variant::FtrlEntropy { g_sum } => {
                add_into(g_sum, g);
                entropic_leader(g_sum, eta, ell)
            }
        };
        Ok(&self.current)
    }

    pub fn step_oga(&mut self, g: &[f64]) -> Result<&[f64]> {
        self.expect(PolicyKind::Oga)?;
        self.step(g)
    }

    pub fn step_ftrl_l2(&mut self, g: &[f64]) -> Result<&[f64]> {
        self.expect(PolicyKind::FtrlL2)?;
        self.step(g)
    }

    pub fn step_ftrl_entropy(&mut self, g: &[f64]) -> Result<&[f64]> {
        self.expect(PolicyKind::FtrlEntropy)?;
        self.step(g)
    }

    fn expect(&self, kind: PolicyKind) -> Result<()> {
        if self.kind() != kind {
            return Err(Error::Unsupported(format!("{:?} step on a {:?} policy", kind, self.kind())));
        }
        Ok(())
    }
}

fn add_into(acc: &mut [f64], g: &[f64]) {
    for (a, b) in acc.iter_mut().zip(g) {
        *a += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn clip_is_enough_when_budget_is_slack() {
        assert_eq!(project_capped_simplex(&[2.0, -1.0, 0.5], 2.0), vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn symmetric_projection() {
        let p = project_capped_simplex(&[1.0, 1.0, 1.0], 2.0);
        assert!(close(&p, &[2.0 / 3.0; 3], 1e-9));
        assert!(p.iter().sum::<f64>() <= 2.0);
    }

    #[test]
    fn oga_fixed_point_and_unit_step() {
        let mut s = PolicyState::new(PolicyKind::Oga, 3, 1.0, 1.0).unwrap();
        s.current = vec![0.0; 3];
        s.variant = Variant::Oga { x: vec![0.0; 3] };
        assert_eq!(s.step_oga(&[0.0; 3]).unwrap(), &[0.0; 3]);
        assert_eq!(s.step_oga(&[1.0, 0.0, 0.0]).unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn ftrl_l2_first_step_matches_oga_from_origin() {
        let g = [0.4, 1.3, 0.2, 0.0];
        let mut f = PolicyState::new(PolicyKind::FtrlL2, 4, 1.5, 0.7).unwrap();
        let mut o = PolicyState::new(PolicyKind::Oga, 4, 1.5, 0.7).unwrap();
        o.variant = Variant::Oga { x: vec![0.0; 4] };
        let a = f.step_ftrl_l2(&g).unwrap().to_vec();
        let b = o.step_oga(&g).unwrap().to_vec();
        assert_eq!(a, b);
    }

    #[test]
    fn entropy_zero_gradient() {
        let x = entropic_leader(&[0.0; 4], 1.0, 2.0);
        assert!(close(&x, &[(-1.0f64).exp(); 4], 1e-12));
        let x = entropic_leader(&[0.0; 4], 1.0, 1.0);
        assert!(close(&x, &[0.25; 4], 1e-9));
    }

    #[test]
    fn wrong_variant_is_rejected() {
        let mut s = PolicyState::new(PolicyKind::FtrlL2, 2, 1.0, 0.1).unwrap();
        assert!(s.step_oga(&[0.0, 0.0]).is_err());
        assert!(s.step(&[0.0]).is_err());
    }

    #[test]
    fn initial_iterate() {
        let s = PolicyState::new(PolicyKind::FtrlEntropy, 4, 2.0, 0.1).unwrap();
        assert_eq!(s.current(), &[0.5; 4]);
    }
}
