//! Weighted threshold potential functions
//! `f(y) = Σ_j c_j · min{b_j, w_j · y}` on `{0,1}^n` and their concave
//! extension to `[0,1]^n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold `b_j` of a potential. An infinite threshold is kept as its own
/// variant so that `min{b, w·y}` never saturates spuriously.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Finite(f64),
    Infinite,
}

impl Threshold {
    pub fn is_finite(&self) -> bool {
        matches!(self, Threshold::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Threshold::Finite(b) => Some(b),
            Threshold::Infinite => None,
        }
    }

    #[inline]
    pub fn cap(&self, s: f64) -> f64 {
        match *self {
            Threshold::Finite(b) => b.min(s),
            Threshold::Infinite => s,
        }
    }
}

/// One term `c · min{b, w·y}`. The weight vector is stored sparsely: strictly
/// increasing indices, strictly positive values.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdPotential {
    c: f64,
    b: Threshold,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl ThresholdPotential {
    /// Build from a dense weight vector; zero weights are dropped.
    pub fn new(c: f64, b: Threshold, w: &[f64]) -> Result<Self> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &v) in w.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidPotential {
                    index: 0,
                    reason: format!("weight w[{i}] = {v} is not a nonnegative finite number"),
                });
            }
            if v > 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Self::from_parts(c, b, indices, values)
    }

    /// Build from `(index, value)` pairs. Indices must be distinct.
    pub fn sparse(c: f64, b: Threshold, indices: &[usize], values: &[f64]) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::InvalidPotential {
                index: 0,
                reason: format!(
                    "{} indices but {} values in sparse weight vector",
                    indices.len(),
                    values.len()
                ),
            });
        }
        let mut pairs: Vec<(usize, f64)> = indices.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by_key(|&(i, _)| i);
        if pairs.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidPotential {
                index: 0,
                reason: "duplicate index in sparse weight vector".into(),
            });
        }
        let mut idx = Vec::with_capacity(pairs.len());
        let mut val = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidPotential {
                    index: 0,
                    reason: format!("weight w[{i}] = {v} is not a nonnegative finite number"),
                });
            }
            if v > 0.0 {
                idx.push(i);
                val.push(v);
            }
        }
        Self::from_parts(c, b, idx, val)
    }

    /// `c · min{b, Σ_{i∈members} y_i}`, the building block of coverage functions.
    pub fn indicator(c: f64, b: Threshold, members: &[usize]) -> Result<Self> {
        let values = vec![1.0; members.len()];
        Self::sparse(c, b, members, &values)
    }

    fn from_parts(c: f64, b: Threshold, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidPotential {
                index: 0,
                reason: format!("weight c = {c} must be positive and finite"),
            });
        }
        if let Threshold::Finite(bv) = b {
            if !(bv >= 0.0) || !bv.is_finite() {
                return Err(Error::InvalidPotential {
                    index: 0,
                    reason: format!("threshold b = {bv} must be nonnegative"),
                });
            }
        }
        Ok(Self { c, b, indices, values })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> Threshold {
        self.b
    }

    /// Nonzero support of `w`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Values of `w` on [`indices`](Self::indices).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self, i: usize) -> f64 {
        match self.indices.binary_search(&i) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn dense_weights(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            w[i] = v;
        }
        w
    }

    fn max_weight(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    #[inline]
    fn value_mask(&self, x: &[bool]) -> f64 {
        let s: f64 = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(&i, _)| x[i])
            .map(|(_, &v)| v)
            .sum();
        self.c * self.b.cap(s)
    }

    #[inline]
    fn value_relaxed(&self, y: &[f64]) -> f64 {
        let s: f64 = self.indices.iter().zip(&self.values).map(|(&i, &v)| v * y[i]).sum();
        self.c * self.b.cap(s)
    }
}

/// A point of `{0,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralSet(Vec<bool>);

impl IntegralSet {
    pub fn empty(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn from_indices(n: usize, members: &[usize]) -> Result<Self> {
        let mut v = vec![false; n];
        for &i in members {
            if i >= n {
                return Err(Error::InvalidIndex { index: i, n });
            }
            v[i] = true;
        }
        Ok(Self(v))
    }

    pub fn from_bools(v: Vec<bool>) -> Self {
        Self(v)
    }

    /// Interpret a 0/1 vector. Entries other than exactly 0 or 1 are rejected.
    pub fn from_binary(v: &[f64]) -> Result<Self> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| {
                if x == 0.0 {
                    Ok(false)
                } else if x == 1.0 {
                    Ok(true)
                } else {
                    Err(Error::OutOfBox { index: i, value: x })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i] = true;
    }

    pub fn remove(&mut self, i: usize) {
        self.0[i] = false;
    }

    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for IntegralSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A WTP function over a ground set of size `n`. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "json::WtpJson", into = "json::WtpJson")]
pub struct WtpFunction {
    n: usize,
    potentials: Vec<ThresholdPotential>,
}

impl WtpFunction {
    pub fn new(n: usize, potentials: Vec<ThresholdPotential>) -> Result<Self> {
        for (j, p) in potentials.iter().enumerate() {
            if let Some(&last) = p.indices.last() {
                if last >= n {
                    return Err(Error::InvalidPotential {
                        index: j,
                        reason: format!("weight index {last} is out of range for n = {n}"),
                    });
                }
            }
        }
        Ok(Self { n, potentials })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, potentials: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn potentials(&self) -> &[ThresholdPotential] {
        &self.potentials
    }

    /// `G = |C|`, the number of potentials.
    pub fn num_potentials(&self) -> usize {
        self.potentials.len()
    }

    /// `M`: the largest of all `c_j`, finite `b_j` and `‖w_j‖_∞`.
    pub fn param_bound(&self) -> f64 {
        self.potentials
            .iter()
            .map(|p| p.c.max(p.b.finite().unwrap_or(0.0)).max(p.max_weight()))
            .fold(0.0, f64::max)
    }

    /// Coordinates carrying positive weight in at least one potential.
    pub fn active_coordinates(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for p in &self.potentials {
            for &i in &p.indices {
                seen[i] = true;
            }
        }
        (0..self.n).filter(|&i| seen[i]).collect()
    }

    pub fn eval_integral(&self, x: &IntegralSet) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.eval_mask(x.as_slice()))
    }

    /// Evaluate on a membership mask without dimension checks.
    #[inline]
    pub fn eval_mask(&self, x: &[bool]) -> f64 {
        self.potentials.iter().map(|p| p.value_mask(x)).sum()
    }

    /// Concave extension `f̃` on `[0,1]^n`.
    pub fn eval_relaxed(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y.len())?;
        for (i, &v) in y.iter().enumerate() {
            if !(-crate::TOL..=1.0 + crate::TOL).contains(&v) {
                return Err(Error::OutOfBox { index: i, value: v });
            }
        }
        Ok(self.eval_relaxed_unchecked(y))
    }

    #[inline]
    pub fn eval_relaxed_unchecked(&self, y: &[f64]) -> f64 {
        self.potentials.iter().map(|p| p.value_relaxed(y)).sum()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got });
        }
        Ok(())
    }

    /// Weighted coverage: one potential `weight · min{1, Σ_{i∈S} y_i}` per set.
    /// Sets with zero weight contribute nothing and are skipped.
    pub fn from_weighted_coverage(n: usize, sets: &[(f64, Vec<usize>)]) -> Result<Self> {
        let mut potentials = Vec::with_capacity(sets.len());
        for (j, (weight, members)) in sets.iter().enumerate() {
            if let Some(&bad) = members.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidIndex { index: bad, n });
            }
            if !(*weight >= 0.0) {
                return Err(Error::InvalidPotential {
                    index: j,
                    reason: format!("set weight {weight} is negative"),
                });
            }
            if *weight == 0.0 || members.is_empty() {
                continue;
            }
            let mut m = members.clone();
            m.sort_unstable();
            m.dedup();
            potentials.push(
                ThresholdPotential::indicator(*weight, Threshold::Finite(1.0), &m)
                    .map_err(|e| reindex(e, j))?,
            );
        }
        Self::new(n, potentials)
    }

    /// Facility location `Σ_{v'} p_{v'} · max_{v∈S} w[v][v']` written as a WTP
    /// through the sorted telescoping identity. `weights` is indexed
    /// `[facility][customer]`. The maximum over the empty set is 0. Ties in the
    /// per-customer sort are broken by ascending facility index.
    ///
    /// The result has up to `n · |V'|` potentials.
    pub fn from_facility_location(weights: &[Vec<f64>], probs: &[f64]) -> Result<Self> {
        let n = weights.len();
        let customers = probs.len();
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::NotADistribution { sum });
        }
        for row in weights {
            if row.len() != customers {
                return Err(Error::DimensionMismatch { expected: customers, got: row.len() });
            }
            if let Some(&bad) = row.iter().find(|&&w| !(w >= 0.0)) {
                return Err(Error::InvalidPotential {
                    index: 0,
                    reason: format!("facility weight {bad} is negative"),
                });
            }
        }
        let mut potentials = Vec::new();
        for (v2, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| weights[b][v2].total_cmp(&weights[a][v2]).then(a.cmp(&b)));
            for i in 0..n {
                let next = if i + 1 < n { weights[order[i + 1]][v2] } else { 0.0 };
                let c = (weights[order[i]][v2] - next) * p;
                if c > 0.0 {
                    potentials.push(ThresholdPotential::indicator(
                        c,
                        Threshold::Finite(1.0),
                        &order[..=i],
                    )?);
                }
            }
        }
        Self::new(n, potentials)
    }

    /// Quadratic `h·x + ½ xᵀHx` with `H ≤ 0` symmetric and zero diagonal,
    /// written as `min{∞, (h + H·1)·x} + Σ_{i<j} (−H_ij) · min{1, x_i + x_j}`.
    pub fn from_quadratic(h: &[f64], hmat: &[Vec<f64>]) -> Result<Self> {
        let n = h.len();
        if hmat.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: hmat.len() });
        }
        for (i, row) in hmat.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidPotential {
                    index: i,
                    reason: format!("diagonal entry H[{i}][{i}] = {} is not zero", row[i]),
                });
            }
            for j in 0..n {
                if row[j] > 0.0 {
                    return Err(Error::PositiveInteraction { i, j, value: row[j] });
                }
                if (row[j] - hmat[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidPotential {
                        index: i,
                        reason: format!("H is not symmetric at ({i}, {j})"),
                    });
                }
            }
        }
        let scale = |i: usize| h[i].abs() + hmat[i].iter().map(|v| v.abs()).sum::<f64>();
        let mut linear: Vec<f64> = (0..n).map(|i| h[i] + hmat[i].iter().sum::<f64>()).collect();
        for (i, v) in linear.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -1e-12 * scale(i).max(1.0) {
                    return Err(Error::NegativeMarginal { index: i, value: *v });
                }
                *v = 0.0;
            }
        }
        let mut potentials = Vec::new();
        if linear.iter().any(|&v| v > 0.0) {
            potentials.push(ThresholdPotential::new(1.0, Threshold::Infinite, &linear)?);
        }
        for i in 0..n {
            for j in i + 1..n {
                if hmat[i][j] < 0.0 {
                    potentials.push(ThresholdPotential::indicator(
                        -hmat[i][j],
                        Threshold::Finite(1.0),
                        &[i, j],
                    )?);
                }
            }
        }
        Self::new(n, potentials)
    }
}

fn reindex(e: Error, j: usize) -> Error {
    match e {
        Error::InvalidPotential { reason, .. } => Error::InvalidPotential { index: j, reason },
        other => other,
    }
}

mod json {
    use serde::{Deserialize, Serialize};

    use super::{Threshold, ThresholdPotential, WtpFunction};
    use crate::error::Error;

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct WtpJson {
        pub n: usize,
        pub potentials: Vec<PotentialJson>,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct PotentialJson {
        pub c: f64,
        pub b: ThresholdJson,
        pub w: WeightsJson,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum ThresholdJson {
        Finite(f64),
        Named(String),
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum WeightsJson {
        Dense(Vec<f64>),
        Sparse { indices: Vec<usize>, values: Vec<f64> },
    }

    impl TryFrom<WtpJson> for WtpFunction {
        type Error = Error;

        fn try_from(raw: WtpJson) -> Result<Self, Error> {
            let n = raw.n;
            let mut potentials = Vec::with_capacity(raw.potentials.len());
            for (j, p) in raw.potentials.into_iter().enumerate() {
                let b = match p.b {
                    ThresholdJson::Finite(v) => Threshold::Finite(v),
                    ThresholdJson::Named(s) if s == "inf" => Threshold::Infinite,
                    ThresholdJson::Named(s) => {
                        return Err(Error::InvalidPotential {
                            index: j,
                            reason: format!("threshold must be a number or \"inf\", got {s:?}"),
                        })
                    }
                };
                let pot = match p.w {
                    WeightsJson::Dense(w) => {
                        if w.len() != n {
                            return Err(Error::InvalidPotential {
                                index: j,
                                reason: format!("dense weight vector has length {} but n = {n}", w.len()),
                            });
                        }
                        ThresholdPotential::new(p.c, b, &w)
                    }
                    WeightsJson::Sparse { indices, values } => {
                        ThresholdPotential::sparse(p.c, b, &indices, &values)
                    }
                }
                .map_err(|e| super::reindex(e, j))?;
                potentials.push(pot);
            }
            WtpFunction::new(n, potentials)
        }
    }

    impl From<WtpFunction> for WtpJson {
        /// Canonical form: sparse weights when at most half of the entries are
        /// nonzero, dense otherwise.
        fn from(f: WtpFunction) -> Self {
            let n = f.n;
            let potentials = f
                .potentials
                .into_iter()
                .map(|p| {
                    let b = match p.b {
                        Threshold::Finite(v) => ThresholdJson::Finite(v),
                        Threshold::Infinite => ThresholdJson::Named("inf".into()),
                    };
                    let w = if 2 * p.indices.len() <= n {
                        WeightsJson::Sparse { indices: p.indices.clone(), values: p.values.clone() }
                    } else {
                        WeightsJson::Dense(p.dense_weights(n))
                    };
                    PotentialJson { c: p.c, b, w }
                })
                .collect();
            WtpJson { n, potentials }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(n: usize, c: f64, b: Threshold, w: &[f64]) -> WtpFunction {
        WtpFunction::new(n, vec![ThresholdPotential::new(c, b, w).unwrap()]).unwrap()
    }

    #[test]
    fn integral_examples() {
        let f = single(2, 1.0, Threshold::Finite(1.0), &[1.0, 1.0]);
        assert_eq!(f.eval_integral(&IntegralSet::empty(2)).unwrap(), 0.0);
        assert_eq!(f.eval_integral(&IntegralSet::full(2)).unwrap(), 1.0);

        let sets: Vec<(f64, Vec<usize>)> = (0..10).map(|i| (100.0, vec![i])).collect();
        let f1 = WtpFunction::from_weighted_coverage(100, &sets).unwrap();
        let x = IntegralSet::from_indices(100, &(0..10).collect::<Vec<_>>()).unwrap();
        assert_eq!(f1.eval_integral(&x).unwrap(), 1000.0);
    }

    #[test]
    fn infinite_threshold_is_linear() {
        let f = single(3, 2.0, Threshold::Infinite, &[5.0, 7.0, 0.0]);
        assert_eq!(f.eval_integral(&IntegralSet::full(3)).unwrap(), 24.0);
        assert_eq!(f.eval_relaxed(&[0.5, 0.5, 1.0]).unwrap(), 12.0);
    }

    #[test]
    fn relaxed_examples() {
        let f = single(2, 1.0, Threshold::Finite(1.0), &[1.0, 1.0]);
        assert_eq!(f.eval_relaxed(&[0.5, 0.5]).unwrap(), 1.0);
        let g = WtpFunction::new(
            2,
            vec![
                ThresholdPotential::new(1.0, Threshold::Finite(0.5), &[1.0, 0.0]).unwrap(),
                ThresholdPotential::new(1.0, Threshold::Finite(0.5), &[0.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(g.eval_relaxed(&[0.5, 0.5]).unwrap(), 1.0);
    }

    #[test]
    fn dimension_and_box_errors() {
        let f = single(2, 1.0, Threshold::Finite(1.0), &[1.0, 1.0]);
        assert!(matches!(
            f.eval_integral(&IntegralSet::empty(3)),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert!(matches!(f.eval_relaxed(&[1.5, 0.0]), Err(Error::OutOfBox { index: 0, .. })));
    }

    #[test]
    fn invalid_potentials_rejected() {
        assert!(ThresholdPotential::new(0.0, Threshold::Infinite, &[1.0]).is_err());
        assert!(ThresholdPotential::new(1.0, Threshold::Finite(-1.0), &[1.0]).is_err());
        assert!(ThresholdPotential::new(1.0, Threshold::Infinite, &[-1.0]).is_err());
        assert!(ThresholdPotential::sparse(1.0, Threshold::Infinite, &[1, 1], &[1.0, 1.0]).is_err());
        let p = ThresholdPotential::indicator(1.0, Threshold::Infinite, &[5]).unwrap();
        assert!(WtpFunction::new(3, vec![p]).is_err());
    }

    #[test]
    fn coverage_examples() {
        let f = WtpFunction::from_weighted_coverage(3, &[(2.0, vec![0, 1])]).unwrap();
        assert_eq!(f.num_potentials(), 1);
        assert_eq!(f.eval_integral(&IntegralSet::from_indices(3, &[1]).unwrap()).unwrap(), 2.0);
        assert_eq!(f.eval_integral(&IntegralSet::from_indices(3, &[0, 1]).unwrap()).unwrap(), 2.0);
        assert_eq!(f.eval_integral(&IntegralSet::from_indices(3, &[2]).unwrap()).unwrap(), 0.0);

        let empty = WtpFunction::from_weighted_coverage(2, &[]).unwrap();
        assert_eq!(empty.eval_integral(&IntegralSet::full(2)).unwrap(), 0.0);

        let g = WtpFunction::from_weighted_coverage(4, &[(1.0, vec![0]), (1.0, vec![1, 2])]).unwrap();
        let x = IntegralSet::from_binary(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.eval_integral(&x).unwrap(), 2.0);

        assert!(matches!(
            WtpFunction::from_weighted_coverage(2, &[(1.0, vec![2])]),
            Err(Error::InvalidIndex { index: 2, n: 2 })
        ));
    }

    #[test]
    fn facility_location_examples() {
        let f = WtpFunction::from_facility_location(&[vec![3.0], vec![1.0]], &[1.0]).unwrap();
        assert_eq!(f.eval_integral(&IntegralSet::from_indices(2, &[1]).unwrap()).unwrap(), 1.0);
        assert_eq!(f.eval_integral(&IntegralSet::full(2)).unwrap(), 3.0);
        assert_eq!(f.eval_integral(&IntegralSet::empty(2)).unwrap(), 0.0);

        let g = WtpFunction::from_facility_location(&[vec![2.0, 0.0], vec![0.0, 2.0]], &[0.5, 0.5]).unwrap();
        assert_eq!(g.eval_integral(&IntegralSet::from_indices(2, &[0]).unwrap()).unwrap(), 1.0);

        assert!(matches!(
            WtpFunction::from_facility_location(&[vec![1.0, 1.0]], &[0.5, 0.4]),
            Err(Error::NotADistribution { .. })
        ));
    }

    #[test]
    fn facility_location_tie_break_is_by_index() {
        let f = WtpFunction::from_facility_location(&[vec![2.0], vec![2.0], vec![1.0]], &[1.0]).unwrap();
        // ties: facility 0 precedes facility 1, so the first prefix is {0}
        assert_eq!(f.potentials()[0].indices(), &[0, 1]);
        assert_eq!(f.potentials()[0].c(), 1.0);
        assert_eq!(f.potentials()[1].indices(), &[0, 1, 2]);
    }

    #[test]
    fn quadratic_examples() {
        let f = WtpFunction::from_quadratic(&[1.0, 1.0], &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(f.eval_integral(&IntegralSet::full(2)).unwrap(), 2.0);
        assert_eq!(f.eval_integral(&IntegralSet::from_indices(2, &[0]).unwrap()).unwrap(), 1.0);

        let h = [2.0, 2.0];
        let hm = [vec![0.0, -1.0], vec![-1.0, 0.0]];
        let g = WtpFunction::from_quadratic(&h, &hm).unwrap();
        assert_eq!(g.eval_integral(&IntegralSet::full(2)).unwrap(), 3.0);
        assert_eq!(g.eval_integral(&IntegralSet::from_indices(2, &[0]).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn quadratic_errors() {
        assert!(matches!(
            WtpFunction::from_quadratic(&[1.0, 1.0], &[vec![0.0, 0.5], vec![0.5, 0.0]]),
            Err(Error::PositiveInteraction { .. })
        ));
        assert!(matches!(
            WtpFunction::from_quadratic(&[1.0, 1.0], &[vec![0.0, -2.0], vec![-2.0, 0.0]]),
            Err(Error::NegativeMarginal { .. })
        ));
    }

    #[test]
    fn bounds() {
        let f = WtpFunction::new(
            3,
            vec![
                ThresholdPotential::new(2.0, Threshold::Finite(7.0), &[1.0, 0.0, 0.0]).unwrap(),
                ThresholdPotential::new(1.0, Threshold::Infinite, &[0.0, 9.0, 0.0]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(f.num_potentials(), 2);
        assert_eq!(f.param_bound(), 9.0);
        assert_eq!(f.active_coordinates(), vec![0, 1]);
    }

    #[test]
    fn json_accepts_dense_sparse_and_inf() {
        let text = r#"{"n": 3, "potentials": [
            {"c": 1.5, "b": "inf", "w": [1.0, 0.0, 2.0]},
            {"c": 2.0, "b": 1.0, "w": {"indices": [2], "values": [1.0]}}
        ]}"#;
        let f: WtpFunction = serde_json::from_str(text).unwrap();
        assert_eq!(f.potentials()[0].b(), Threshold::Infinite);
        assert_eq!(f.potentials()[1].indices(), &[2]);
        assert_eq!(f.eval_integral(&IntegralSet::full(3)).unwrap(), 1.5 * 3.0 + 2.0);

        let back = serde_json::to_string(&f).unwrap();
        let again: WtpFunction = serde_json::from_str(&back).unwrap();
        assert_eq!(f, again);

        let bad = r#"{"n": 2, "potentials": [{"c": 1.0, "b": "huge", "w": [1.0, 0.0]}]}"#;
        assert!(serde_json::from_str::<WtpFunction>(bad).is_err());
        let short = r#"{"n": 3, "potentials": [{"c": 1.0, "b": 1.0, "w": [1.0]}]}"#;
        assert!(serde_json::from_str::<WtpFunction>(short).is_err());
    }
}
