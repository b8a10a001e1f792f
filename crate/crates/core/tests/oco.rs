use proptest::prelude::*;
use raoco::oco::{entropic_leader, neg_entropy, project_capped_simplex, PolicyKind, PolicyState};

/// Exact projection: `Σ clip(v − θ, 0, 1)` is piecewise linear in `θ` with
/// breakpoints at `v_i` and `v_i − 1`; find the segment holding `ℓ` and
/// solve it.
fn breakpoint_projection(v: &[f64], ell: f64) -> Vec<f64> {
    let clip = |theta: f64| -> Vec<f64> { v.iter().map(|a| (a - theta).clamp(0.0, 1.0)).collect() };
    if clip(0.0).iter().sum::<f64>() <= ell {
        return clip(0.0);
    }
    let total = |theta: f64| -> f64 { clip(theta).iter().sum() };
    let mut pts: Vec<f64> = v.iter().flat_map(|&a| [a, a - 1.0]).filter(|&t| t > 0.0).collect();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (slo, shi) = (total(lo), total(hi));
        if slo >= ell && shi <= ell {
            let theta = if slo == shi { lo } else { lo + (slo - ell) / (slo - shi) * (hi - lo) };
            return clip(theta);
        }
    }
    unreachable!()
}

/// Optimal value of `η G·x − Σ x ln x` over `X̃_ℓ` as the minimum of the
/// one-dimensional convex dual, found by golden-section search. Every dual
/// value is an upper bound on the primal optimum.
fn entropic_oracle(g: &[f64], eta: f64, ell: f64) -> f64 {
    let inner = |theta: f64| -> Vec<f64> { g.iter().map(|&v| (eta * v - 1.0 - theta).exp().min(1.0)).collect() };
    let dual = |theta: f64| -> f64 {
        let x = inner(theta);
        x.iter().zip(g).map(|(a, v)| eta * v * a - if *a > 0.0 { a * a.ln() } else { 0.0 } - theta * a).sum::<f64>() + theta * ell
    };
    let (mut a, mut b) = (0.0f64, 1.0f64);
    while dual(b * 2.0) < dual(b) || inner(b).iter().sum::<f64>() > ell {
        b *= 2.0;
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if dual(c) <= dual(d) {
            b = d;
        } else {
            a = c;
        }
    }
    dual(0.0).min(dual(0.5 * (a + b)))
}

fn entropic_objective(g: &[f64], eta: f64, x: &[f64]) -> f64 {
    eta * g.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - neg_entropy(x)
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n)
}

proptest! {
    #[test]
    fn projection_matches_breakpoint_search((v, ell) in (1usize..=12).prop_flat_map(|n| (vector(n), 1..=n))) {
        let p = project_capped_simplex(&v, ell as f64);
        let q = breakpoint_projection(&v, ell as f64);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", p, q);
        }
        prop_assert!(p.iter().sum::<f64>() <= ell as f64 + 1e-12);
    }

    #[test]
    fn projection_is_nearest((v, ell, w) in (1usize..=8).prop_flat_map(|n| (vector(n), 1..=n, prop::collection::vec(0.0f64..=1.0, n)))) {
        let p = project_capped_simplex(&v, ell as f64);
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = if s > ell as f64 { w.iter().map(|a| a * ell as f64 / s).collect() } else { w };
        let d = |x: &[f64]| x.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        prop_assert!(d(&p) <= d(&w) + 1e-9);
    }

    #[test]
    fn entropic_leader_matches_dual_search((g, ell) in (1usize..=10).prop_flat_map(|n| (vector(n), 1..=n)), eta in 0.05f64..3.0) {
        let x = entropic_leader(&g, eta, ell as f64);
        let bound = entropic_oracle(&g, eta, ell as f64);
        prop_assert!(x.iter().sum::<f64>() <= ell as f64 + 1e-9);
        prop_assert!(x.iter().all(|&a| (0.0..=1.0).contains(&a)));
        let ox = entropic_objective(&g, eta, &x);
        prop_assert!(ox <= bound + 1e-9 && ox >= bound - 1e-7, "{} vs {}", ox, bound);
    }

    #[test]
    fn ftrl_l2_is_projected_scaled_sum((gs, ell) in (2usize..=8).prop_flat_map(|n| (prop::collection::vec(vector(n), 1..6), 1..n)), eta in 0.01f64..1.0) {
        let n = gs[0].len();
        let mut s = PolicyState::new(PolicyKind::FtrlL2, n, ell as f64, eta).unwrap();
        let mut sum = vec![0.0; n];
        for g in &gs {
            for (a, b) in sum.iter_mut().zip(g) { *a += b; }
            let got = s.step_ftrl_l2(g).unwrap().to_vec();
            let want = breakpoint_projection(&sum.iter().map(|v| eta * v).collect::<Vec<_>>(), ell as f64);
            for (a, b) in got.iter().zip(&want) { prop_assert!((a - b).abs() < 1e-9); }
        }
    }

    #[test]
    fn oga_is_projected_step((gs, ell) in (2usize..=8).prop_flat_map(|n| (prop::collection::vec(vector(n), 1..6), 1..n)), eta in 0.01f64..1.0) {
        let n = gs[0].len();
        let mut s = PolicyState::new(PolicyKind::Oga, n, ell as f64, eta).unwrap();
        let mut x = vec![ell as f64 / n as f64; n];
        prop_assert_eq!(s.current(), &x[..]);
        for g in &gs {
            let moved: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + eta * b).collect();
            x = breakpoint_projection(&moved, ell as f64);
            let got = s.step_oga(g).unwrap();
            for (a, b) in got.iter().zip(&x) { prop_assert!((a - b).abs() < 1e-9); }
        }
    }
}

#[test]
fn oga_regret_on_linear_rewards_is_within_the_bound() {
    use rand::{Rng as _, SeedableRng};
    let (n, ell, t) = (10usize, 3usize, 2000usize);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let gs: Vec<Vec<f64>> = (0..t).map(|_| (0..n).map(|i| r.random_range(0.0..1.0) * (1.0 + i as f64 / n as f64)).collect()).collect();
    let g_norm = gs.iter().map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let diam = (2.0 * ell as f64).sqrt();
    let eta = diam / (g_norm * (t as f64).sqrt());
    let mut s = PolicyState::new(PolicyKind::Oga, n, ell as f64, eta).unwrap();
    let mut earned = 0.0;
    for g in &gs {
        earned += g.iter().zip(s.current()).map(|(a, b)| a * b).sum::<f64>();
        s.step(g).unwrap();
    }
    let mut totals: Vec<f64> = (0..n).map(|i| gs.iter().map(|g| g[i]).sum()).collect();
    totals.sort_by(|a, b| b.total_cmp(a));
    let best: f64 = totals[..ell].iter().sum();
    let bound = diam * g_norm * (t as f64).sqrt();
    assert!(best - earned <= bound, "regret {} exceeds {bound}", best - earned);
}

#[test]
fn step_kind_mismatch_is_rejected() {
    let mut s = PolicyState::new(PolicyKind::Oga, 3, 1.0, 0.1).unwrap();
    assert!(s.step_ftrl_entropy(&[1.0, 0.0, 0.0]).is_err());
    assert!(s.step(&[1.0]).is_err());
    assert!(PolicyState::new(PolicyKind::Oga, 3, 1.0, 0.0).is_err());
}
