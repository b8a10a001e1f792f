//! The second-stage reward `F(x) = max { f(y) : y ∈ I, y ≤ x }`, offline
//! optima, and a greedy fallback.
//!
//! Exact evaluation enumerates the independent subsets of `supp(x)` of
//! maximal size only (enough since `f` is monotone), restricted to the
//! coordinates on which `f` actually depends. Among maximizers the one whose
//! sorted member list is lexicographically smallest is returned.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{Matroid, MatroidKind};
use crate::relaxation;
use crate::wtp::{IntegralSet, WtpFunction};

pub const DEFAULT_EXACT_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Exact,
    Greedy,
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub mode: OracleMode,
    pub exact_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { mode: OracleMode::Auto, exact_budget: DEFAULT_EXACT_BUDGET }
    }
}

impl OracleConfig {
    pub fn exact() -> Self {
        Self { mode: OracleMode::Exact, ..Self::default() }
    }

    pub fn greedy() -> Self {
        Self { mode: OracleMode::Greedy, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exact_budget == 0 {
            return Err(Error::InvalidConfig("exact_budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which method produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluation {
    Exact,
    Greedy,
}

impl Evaluation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Evaluation::Exact => "exact",
            Evaluation::Greedy => "greedy",
        }
    }

    fn combine(self, other: Evaluation) -> Evaluation {
        if self == Evaluation::Exact && other == Evaluation::Exact {
            Evaluation::Exact
        } else {
            Evaluation::Greedy
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondStage {
    pub value: f64,
    pub argmax: IntegralSet,
    pub mode: Evaluation,
}

/// `n choose r`, saturating at `u128::MAX`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advance `c` (strictly increasing indices into `0..n`) to the next
/// combination in lexicographic order. Returns false after the last one.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if c[i] < n - r + i {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The `rank`-th `r`-combination of `0..n` in lexicographic order.
fn unrank_combination(n: usize, r: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(r);
    let mut start = 0;
    for slot in 0..r {
        let remaining = r - slot;
        let mut v = start;
        loop {
            let block = binomial(n - v - 1, remaining - 1);
            if rank < block {
                break;
            }
            rank -= block;
            v += 1;
        }
        out.push(v);
        start = v + 1;
    }
    out
}

/// Element groups with a pick size each: choosing `size` members from every
/// group yields the maximal independent subsets.
fn candidate_groups(f_active: &[bool], m: &Matroid, x: &IntegralSet) -> Vec<(Vec<usize>, usize)> {
    let supp: Vec<usize> = x.support().into_iter().filter(|&i| f_active[i] && m.is_selectable(i)).collect();
    match m.kind() {
        MatroidKind::Uniform { k } => {
            let r = (*k).min(supp.len());
            vec![(supp, r)]
        }
        MatroidKind::Partition { caps, .. } => {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); caps.len()];
            for i in supp {
                groups[m.part_of(i).expect("selectable")].push(i);
            }
            groups
                .into_iter()
                .zip(caps)
                .filter(|(g, _)| !g.is_empty())
                .map(|(g, &cap)| {
                    let r = cap.min(g.len());
                    (g, r)
                })
                .collect()
        }
    }
}

fn count_candidates(groups: &[(Vec<usize>, usize)]) -> u128 {
    groups.iter().fold(1u128, |acc, (g, r)| acc.saturating_mul(binomial(g.len(), *r)))
}

fn active_mask(f: &WtpFunction) -> Vec<bool> {
    let mut mask = vec![false; f.n()];
    for i in f.active_coordinates() {
        mask[i] = true;
    }
    mask
}

/// Exhaustive search over the product of per-group combinations.
fn enumerate_best(f: &WtpFunction, groups: &[(Vec<usize>, usize)]) -> (f64, Vec<usize>) {
    let n = f.n();
    let mut combos: Vec<Vec<usize>> = groups.iter().map(|(_, r)| (0..*r).collect()).collect();
    let mut mask = vec![false; n];
    let mut best_val = f64::NEG_INFINITY;
    let mut best: Vec<usize> = Vec::new();
    loop {
        let mut members: Vec<usize> = Vec::new();
        for ((g, _), c) in groups.iter().zip(&combos) {
            members.extend(c.iter().map(|&p| g[p]));
        }
        for &i in &members {
            mask[i] = true;
        }
        let v = f.eval_mask(&mask);
        for &i in &members {
            mask[i] = false;
        }
        members.sort_unstable();
        if v > best_val || (v == best_val && members < best) {
            best_val = v;
            best = members;
        }
        // odometer over groups, last group fastest
        let mut g = groups.len();
        let advanced = loop {
            if g == 0 {
                break false;
            }
            g -= 1;
            if next_combination(&mut combos[g], groups[g].0.len()) {
                for later in g + 1..groups.len() {
                    combos[later] = (0..groups[later].1).collect();
                }
                break true;
            }
        };
        if !advanced {
            break;
        }
    }
    (best_val.max(0.0), best)
}

/// Lazy greedy: repeatedly add the element of largest marginal gain that
/// keeps the set independent, lowest index first on ties, until no element
/// has positive gain.
pub fn greedy(f: &WtpFunction, m: &Matroid, x: &IntegralSet) -> Result<SecondStage> {
    check(f, m, x)?;
    let active = active_mask(f);
    let mut mask = vec![false; f.n()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut value = 0.0;
    // (upper bound on gain, element); stale bounds only overestimate
    let mut heap: Vec<(f64, usize)> = Vec::new();
    for i in x.support() {
        if active[i] && m.is_selectable(i) {
            mask[i] = true;
            let g = f.eval_mask(&mask);
            mask[i] = false;
            heap.push((g, i));
        }
    }
    let better = |a: &(f64, usize), b: &(f64, usize)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut fresh = vec![true; f.n()];
    while !heap.is_empty() {
        let top = (0..heap.len()).fold(0, |best, j| if better(&heap[j], &heap[best]) { j } else { best });
        let (bound, e) = heap[top];
        chosen.push(e);
        let feasible = m.is_independent_indices(&chosen);
        chosen.pop();
        if !feasible {
            heap.swap_remove(top);
        } else if !fresh[e] {
            mask[e] = true;
            heap[top] = (f.eval_mask(&mask) - value, e);
            mask[e] = false;
            fresh[e] = true;
        } else if bound <= 0.0 {
            break;
        } else {
            heap.swap_remove(top);
            mask[e] = true;
            chosen.push(e);
            value = f.eval_mask(&mask);
            fresh.iter_mut().for_each(|v| *v = false);
        }
    }
    chosen.sort_unstable();
    Ok(SecondStage {
        value,
        argmax: IntegralSet::from_indices(f.n(), &chosen)?,
        mode: Evaluation::Greedy,
    })
}

fn check(f: &WtpFunction, m: &Matroid, x: &IntegralSet) -> Result<()> {
    if f.n() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), got: f.n() });
    }
    if x.len() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: x.len() });
    }
    Ok(())
}

/// `F(x)` together with a maximizer.
pub fn second_stage_value(f: &WtpFunction, m: &Matroid, x: &IntegralSet, cfg: &OracleConfig) -> Result<SecondStage> {
    check(f, m, x)?;
    cfg.validate()?;
    if cfg.mode == OracleMode::Greedy {
        return greedy(f, m, x);
    }
    let active = active_mask(f);
    let groups = candidate_groups(&active, m, x);
    let needed = count_candidates(&groups);
    if needed > cfg.exact_budget as u128 {
        return match cfg.mode {
            OracleMode::Auto => greedy(f, m, x),
            _ => Err(Error::EnumerationBudget { needed, budget: cfg.exact_budget }),
        };
    }
    let (value, members) = enumerate_best(f, &groups);
    Ok(SecondStage { value, argmax: IntegralSet::from_indices(f.n(), &members)?, mode: Evaluation::Exact })
}

/// Merge identical functions, keeping first-appearance order.
pub fn dedup_functions<'a>(fs: &[&'a WtpFunction]) -> Vec<(&'a WtpFunction, usize)> {
    let mut out: Vec<(&WtpFunction, usize)> = Vec::new();
    for &f in fs {
        match out.iter_mut().find(|(g, _)| std::ptr::eq(*g, f) || *g == f) {
            Some(entry) => entry.1 += 1,
            None => out.push((f, 1)),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct OfflineOpt {
    /// `(1/T)·max_x Σ_t F_t(x)`.
    pub value: f64,
    pub total: f64,
    pub x: IntegralSet,
    pub mode: Evaluation,
}

/// Exhaustive maximum of `Σ_t F_t(x)` over `X_ℓ`.
///
/// Only elements that carry weight in some function and are selectable are
/// enumerated; the others cannot change any `F_t`. Since every `F_t` is
/// monotone, sets of size `min(ℓ, #relevant)` suffice.
pub fn offline_opt_integral(fs: &[&WtpFunction], m: &Matroid, ell: usize, cfg: &OracleConfig) -> Result<OfflineOpt> {
    cfg.validate()?;
    let n = m.n();
    if fs.is_empty() {
        return Ok(OfflineOpt { value: 0.0, total: 0.0, x: IntegralSet::empty(n), mode: Evaluation::Exact });
    }
    for f in fs {
        if f.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.n() });
        }
    }
    let distinct = dedup_functions(fs);
    let mut relevant = vec![false; n];
    for (f, _) in &distinct {
        for i in f.active_coordinates() {
            relevant[i] |= m.is_selectable(i);
        }
    }
    let relevant: Vec<usize> = (0..n).filter(|&i| relevant[i]).collect();
    let r = ell.min(relevant.len());
    let needed = binomial(relevant.len(), r);
    if needed > cfg.exact_budget as u128 {
        return Err(Error::EnumerationBudget { needed, budget: cfg.exact_budget });
    }
    let score = |members: &[usize]| -> Result<(f64, Evaluation)> {
        let x = IntegralSet::from_indices(n, members)?;
        let mut total = 0.0;
        let mut mode = Evaluation::Exact;
        for (f, mult) in &distinct {
            let s = second_stage_value(f, m, &x, cfg)?;
            total += *mult as f64 * s.value;
            mode = mode.combine(s.mode);
        }
        Ok((total, mode))
    };

    let needed = needed as u64;
    let chunks = (rayon::current_num_threads() as u64 * 8).clamp(1, needed.max(1));
    let chunk_len = needed.div_ceil(chunks);
    let partial: Vec<Result<Option<(f64, Vec<usize>, Evaluation)>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk_len;
            let end = ((c + 1) * chunk_len).min(needed);
            if start >= end {
                return Ok(None);
            }
            let mut combo = unrank_combination(relevant.len(), r, start as u128);
            let mut best: Option<(f64, Vec<usize>, Evaluation)> = None;
            let mut mode = Evaluation::Exact;
            for rank in start..end {
                let members: Vec<usize> = combo.iter().map(|&p| relevant[p]).collect();
                let (v, md) = score(&members)?;
                mode = mode.combine(md);
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, members, mode));
                }
                if rank + 1 < end {
                    next_combination(&mut combo, relevant.len());
                }
            }
            Ok(best.map(|(v, s, _)| (v, s, mode)))
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut mode = Evaluation::Exact;
    for p in partial {
        if let Some((v, s, md)) = p? {
            mode = mode.combine(md);
            // chunks are in lexicographic order, so strict improvement keeps
            // the smallest maximizer
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, s));
            }
        }
    }
    let (total, members) = best.expect("at least one candidate");
    Ok(OfflineOpt {
        value: total / fs.len() as f64,
        total,
        x: IntegralSet::from_indices(n, &members)?,
        mode,
    })
}

/// `(1/T)·max Σ_t F̃_t(x̃)` over `X̃_ℓ` together with the maximizer.
pub fn offline_opt_fractional_point(fs: &[&WtpFunction], m: &Matroid, ell: usize) -> Result<(f64, Vec<f64>)> {
    if fs.is_empty() {
        return Ok((0.0, vec![0.0; m.n()]));
    }
    let distinct = dedup_functions(fs);
    let terms: Vec<(&WtpFunction, f64)> = distinct.iter().map(|&(f, c)| (f, c as f64)).collect();
    let opt = relaxation::maximize_sum(&terms, m, ell as f64)?;
    Ok((opt.total / fs.len() as f64, opt.x))
}

/// `(1/T)·max Σ_t F̃_t(x̃)`; an upper bound on [`offline_opt_integral`].
pub fn offline_opt_fractional(fs: &[&WtpFunction], m: &Matroid, ell: usize) -> Result<f64> {
    Ok(offline_opt_fractional_point(fs, m, ell)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wtp::{Threshold, ThresholdPotential};

    fn f_sum() -> WtpFunction {
        WtpFunction::new(2, vec![ThresholdPotential::new(1.0, Threshold::Finite(1.0), &[1.0, 1.0]).unwrap()]).unwrap()
    }

    #[test]
    fn lexicographic_tie_break() {
        let m = Matroid::uniform(2, 1).unwrap();
        let s = second_stage_value(&f_sum(), &m, &IntegralSet::full(2), &OracleConfig::exact()).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.argmax.support(), vec![0]);
    }

    #[test]
    fn empty_selection() {
        let m = Matroid::uniform(2, 1).unwrap();
        let s = second_stage_value(&f_sum(), &m, &IntegralSet::empty(2), &OracleConfig::exact()).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.argmax.count(), 0);
    }

    #[test]
    fn combination_ranks_round_trip() {
        let mut c: Vec<usize> = (0..3).collect();
        let mut rank = 0u128;
        loop {
            assert_eq!(unrank_combination(7, 3, rank), c);
            rank += 1;
            if !next_combination(&mut c, 7) {
                break;
            }
        }
        assert_eq!(rank, binomial(7, 3));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(19, 10), 92378);
        assert_eq!(binomial(20, 5), 15504);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(4, 0), 1);
    }

    #[test]
    fn exact_budget_enforced() {
        let m = Matroid::uniform(2, 1).unwrap();
        let cfg = OracleConfig { mode: OracleMode::Exact, exact_budget: 1 };
        let e = second_stage_value(&f_sum(), &m, &IntegralSet::full(2), &cfg).unwrap_err();
        assert!(matches!(e, Error::EnumerationBudget { needed: 2, budget: 1 }));
        let cfg = OracleConfig { mode: OracleMode::Auto, exact_budget: 1 };
        let s = second_stage_value(&f_sum(), &m, &IntegralSet::full(2), &cfg).unwrap();
        assert_eq!(s.mode, Evaluation::Greedy);
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn partition_groups() {
        let f = WtpFunction::new(
            3,
            vec![ThresholdPotential::new(1.0, Threshold::Infinite, &[1.0, 2.0, 4.0]).unwrap()],
        )
        .unwrap();
        let m = Matroid::partition(3, vec![vec![0, 1], vec![2]], vec![1, 1]).unwrap();
        let s = second_stage_value(&f, &m, &IntegralSet::full(3), &OracleConfig::exact()).unwrap();
        assert_eq!(s.value, 6.0);
        assert_eq!(s.argmax.support(), vec![1, 2]);
        let g = greedy(&f, &m, &IntegralSet::full(3)).unwrap();
        assert_eq!(g.value, 6.0);
    }

    #[test]
    fn offline_single_function_is_one_stage_max() {
        let f = WtpFunction::new(
            4,
            vec![ThresholdPotential::new(1.0, Threshold::Infinite, &[3.0, 1.0, 2.0, 5.0]).unwrap()],
        )
        .unwrap();
        let m = Matroid::uniform(4, 2).unwrap();
        let o = offline_opt_integral(&[&f], &m, 2, &OracleConfig::exact()).unwrap();
        assert_eq!(o.value, 8.0);
        assert_eq!(o.x.support(), vec![0, 3]);
        let fr = offline_opt_fractional(&[&f], &m, 2).unwrap();
        assert!((fr - 8.0).abs() < 1e-9);
    }
}
