//! Second-stage constraint matroids. Only uniform and partition matroids are
//! supported; both have polytopes described by `O(n)` explicit inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wtp::IntegralSet;

/// Serialized form of a matroid, without the ground-set size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatroidKind {
    Uniform { k: usize },
    Partition { parts: Vec<Vec<usize>>, caps: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matroid {
    n: usize,
    kind: MatroidKind,
    /// Part index of each element; `None` for elements outside every part.
    part_of: Vec<Option<usize>>,
}

/// Which family a polytope inequality belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `ỹ_i ≤ 1`
    Box(usize),
    /// `ỹ_i ≤ x̃_i`
    Coupling(usize),
    /// Rank inequality; `Some(p)` for part `p` of a partition matroid, `None`
    /// for the single budget row of a uniform matroid.
    Rank(Option<usize>),
    /// `Σ ỹ_i ≤ 0` over the elements of a partition matroid that lie in no part.
    Uncovered,
}

/// `Σ coeffs · ỹ ≤ rhs`. Nonnegativity `ỹ ≥ 0` is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub kind: ConstraintKind,
}

impl Matroid {
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        Self::new(n, MatroidKind::Uniform { k })
    }

    pub fn partition(n: usize, parts: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Self> {
        Self::new(n, MatroidKind::Partition { parts, caps })
    }

    pub fn new(n: usize, kind: MatroidKind) -> Result<Self> {
        let mut part_of = vec![None; n];
        match &kind {
            MatroidKind::Uniform { k } => {
                if *k > n {
                    return Err(Error::InvalidMatroid(format!("rank k = {k} exceeds n = {n}")));
                }
            }
            MatroidKind::Partition { parts, caps } => {
                if parts.len() != caps.len() {
                    return Err(Error::InvalidMatroid(format!(
                        "{} parts but {} capacities",
                        parts.len(),
                        caps.len()
                    )));
                }
                for (p, part) in parts.iter().enumerate() {
                    for &i in part {
                        if i >= n {
                            return Err(Error::InvalidIndex { index: i, n });
                        }
                        if part_of[i].is_some() {
                            return Err(Error::InvalidMatroid(format!(
                                "element {i} belongs to more than one part"
                            )));
                        }
                        part_of[i] = Some(p);
                    }
                }
            }
        }
        Ok(Self { n, kind, part_of })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    /// Rank `k` of a uniform matroid.
    pub fn uniform_rank(&self) -> Option<usize> {
        match self.kind {
            MatroidKind::Uniform { k } => Some(k),
            MatroidKind::Partition { .. } => None,
        }
    }

    /// Whether element `i` can appear in some independent set.
    pub fn is_selectable(&self, i: usize) -> bool {
        match &self.kind {
            MatroidKind::Uniform { k } => *k > 0,
            MatroidKind::Partition { caps, .. } => self.part_of[i].is_some_and(|p| caps[p] > 0),
        }
    }

    pub fn part_of(&self, i: usize) -> Option<usize> {
        self.part_of[i]
    }

    pub fn is_independent(&self, y: &IntegralSet) -> bool {
        if y.len() != self.n {
            return false;
        }
        self.is_independent_indices(&y.support())
    }

    /// Independence of a set given by its (distinct) members.
    pub fn is_independent_indices(&self, members: &[usize]) -> bool {
        match &self.kind {
            MatroidKind::Uniform { k } => members.len() <= *k,
            MatroidKind::Partition { caps, .. } => {
                let mut used = vec![0usize; caps.len()];
                for &i in members {
                    match self.part_of[i] {
                        None => return false,
                        Some(p) => {
                            used[p] += 1;
                            if used[p] > caps[p] {
                                return false;
                            }
                        }
                    }
                }
                true
            }
        }
    }

    /// Size of the largest independent subset of `members`.
    pub fn rank(&self, members: &[usize]) -> usize {
        match &self.kind {
            MatroidKind::Uniform { k } => members.len().min(*k),
            MatroidKind::Partition { caps, .. } => {
                let mut count = vec![0usize; caps.len()];
                for &i in members {
                    if let Some(p) = self.part_of[i] {
                        count[p] += 1;
                    }
                }
                count.iter().zip(caps).map(|(&c, &cap)| c.min(cap)).sum()
            }
        }
    }

    /// Explicit inequalities describing `{ỹ ∈ P(M) : ỹ ≤ x̃}`: one box and one
    /// coupling row per coordinate followed by the rank rows.
    pub fn polytope_constraints(&self, xt: &[f64]) -> Result<Vec<LinearConstraint>> {
        if xt.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: xt.len() });
        }
        for (i, &v) in xt.iter().enumerate() {
            if !(-crate::TOL..=1.0 + crate::TOL).contains(&v) {
                return Err(Error::OutOfBox { index: i, value: v });
            }
        }
        let mut rows = Vec::with_capacity(2 * self.n + 1);
        for i in 0..self.n {
            rows.push(LinearConstraint { coeffs: vec![(i, 1.0)], rhs: 1.0, kind: ConstraintKind::Box(i) });
        }
        for (i, &v) in xt.iter().enumerate() {
            rows.push(LinearConstraint {
                coeffs: vec![(i, 1.0)],
                rhs: v.clamp(0.0, 1.0),
                kind: ConstraintKind::Coupling(i),
            });
        }
        match &self.kind {
            MatroidKind::Uniform { k } => rows.push(LinearConstraint {
                coeffs: (0..self.n).map(|i| (i, 1.0)).collect(),
                rhs: *k as f64,
                kind: ConstraintKind::Rank(None),
            }),
            MatroidKind::Partition { parts, caps } => {
                for (p, (part, &cap)) in parts.iter().zip(caps).enumerate() {
                    let mut members = part.clone();
                    members.sort_unstable();
                    rows.push(LinearConstraint {
                        coeffs: members.into_iter().map(|i| (i, 1.0)).collect(),
                        rhs: cap as f64,
                        kind: ConstraintKind::Rank(Some(p)),
                    });
                }
                let uncovered: Vec<(usize, f64)> =
                    (0..self.n).filter(|&i| self.part_of[i].is_none()).map(|i| (i, 1.0)).collect();
                if !uncovered.is_empty() {
                    rows.push(LinearConstraint { coeffs: uncovered, rhs: 0.0, kind: ConstraintKind::Uncovered });
                }
            }
        }
        Ok(rows)
    }
}
