//! Problem instances: synthetic generators and the JSON instance format.
//!
//! An instance file is a JSON object
//!
//! ```text
//! { "name": str, "n": int, "ell": int, "k": int, "T": int,
//!   "sequence": [int…], "pool": [WtpFunction…],
//!   "matroid"?: Matroid, "sampling"?: "fixed" | "uniform", "seed"?: int }
//! ```
//!
//! `sequence[t]` indexes the pool. Without `"matroid"` the second stage is
//! Uniform(k). With `"sampling": "uniform"` every run draws its own sequence
//! of `T` pool indices with replacement and the stored sequence is only one
//! realization (used by offline optima).

mod karate;

use std::collections::BTreeMap;
use std::path::Path;

use petgraph::unionfind::UnionFind;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use karate::{KARATE_EDGES, KARATE_NODES};

use crate::error::{Error, Result};
use crate::matroid::{Matroid, MatroidKind};
use crate::rng;
use crate::wtp::{Threshold, ThresholdPotential, WtpFunction};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    #[default]
    Fixed,
    Uniform,
}

impl Sampling {
    fn is_fixed(&self) -> bool {
        *self == Sampling::Fixed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub sequence: Vec<usize>,
    pub pool: Vec<WtpFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matroid: Option<MatroidKind>,
    #[serde(default, skip_serializing_if = "Sampling::is_fixed")]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.n == 0 {
            return bad("\"n\" must be positive".into());
        }
        if self.ell > self.n {
            return bad(format!("\"ell\" = {} exceeds \"n\" = {}", self.ell, self.n));
        }
        if self.sequence.len() != self.t {
            return bad(format!("\"sequence\" has {} entries but \"T\" = {}", self.sequence.len(), self.t));
        }
        if self.pool.is_empty() && self.t > 0 {
            return bad("\"pool\" is empty".into());
        }
        for (j, f) in self.pool.iter().enumerate() {
            if f.n() != self.n {
                return bad(format!("\"pool\"[{j}] has n = {} but the instance has n = {}", f.n(), self.n));
            }
        }
        for (t, &s) in self.sequence.iter().enumerate() {
            if s >= self.pool.len() {
                return bad(format!("\"sequence\"[{t}] = {s} is out of range for a pool of {}", self.pool.len()));
            }
        }
        self.matroid().map_err(|e| Error::InvalidInstance(format!("\"matroid\": {e}")))?;
        Ok(())
    }

    /// Second-stage matroid: the explicit one, or Uniform(k).
    pub fn matroid(&self) -> Result<Matroid> {
        match &self.matroid {
            Some(kind) => Matroid::new(self.n, kind.clone()),
            None => Matroid::uniform(self.n, self.k),
        }
    }

    /// The stored sequence of functions.
    pub fn functions(&self) -> Vec<&WtpFunction> {
        self.sequence.iter().map(|&s| &self.pool[s]).collect()
    }

    /// The function sequence a run with this seed sees: the stored one, or
    /// a fresh with-replacement draw from stream 1 of `seed`.
    pub fn run_sequence(&self, seed: u64) -> Vec<usize> {
        match self.sampling {
            Sampling::Fixed => self.sequence.clone(),
            Sampling::Uniform => {
                let mut r = rng::stream(seed, 1);
                (0..self.t).map(|_| r.random_range(0..self.pool.len())).collect()
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<InstanceSpec> {
    let text = std::fs::read_to_string(path)?;
    InstanceSpec::from_json(&text)
}

/// Canonical serialization: pretty JSON with a trailing newline.
pub fn save_instance(spec: &InstanceSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, spec.to_json()?)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverageParams {
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    /// Per-element reward `M`.
    pub m: f64,
    pub cycles: usize,
}

impl Default for CoverageParams {
    fn default() -> Self {
        Self { n: 100, ell: 10, k: 1, m: 100.0, cycles: 50 }
    }
}

/// `f_1` covers elements `0..ℓ`, `f_i` covers element `ℓ+i−2` for
/// `i = 2..ℓ`; each covered element is worth `M`. The sequence cycles
/// through `f_1..f_ℓ`. The construction is deterministic; `seed` is recorded
/// only.
pub fn gen_coverage(p: &CoverageParams, seed: u64) -> Result<InstanceSpec> {
    if p.ell < 1 || 2 * p.ell - 1 > p.n {
        return Err(Error::InvalidConfig(format!("coverage needs 2ℓ−1 ≤ n, got ℓ = {} and n = {}", p.ell, p.n)));
    }
    let mut pool = Vec::with_capacity(p.ell);
    let first: Vec<(f64, Vec<usize>)> = (0..p.ell).map(|e| (p.m, vec![e])).collect();
    pool.push(WtpFunction::from_weighted_coverage(p.n, &first)?);
    for i in 2..=p.ell {
        pool.push(WtpFunction::from_weighted_coverage(p.n, &[(p.m, vec![p.ell + i - 2])])?);
    }
    let sequence: Vec<usize> = (0..p.cycles).flat_map(|_| 0..p.ell).collect();
    let spec = InstanceSpec {
        name: "coverage".into(),
        n: p.n,
        ell: p.ell,
        k: p.k,
        t: sequence.len(),
        sequence,
        pool,
        matroid: None,
        sampling: Sampling::Fixed,
        seed: Some(seed),
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TeamFormationParams {
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    /// Number of functions; each is used once, in order.
    pub m: usize,
    pub h_mean: f64,
    pub h_std: f64,
    pub pair_mean: f64,
    pub pair_std: f64,
    pub shrink: f64,
}

impl Default for TeamFormationParams {
    fn default() -> Self {
        Self { n: 100, ell: 10, k: 4, m: 50, h_mean: 30.0, h_std: 20.0, pair_mean: -20.0, pair_std: 10.0, shrink: 0.9 }
    }
}

/// One random monotone submodular quadratic `h·x + ½xᵀHx`.
///
/// Draw order from the generator: `h_0..h_{n−1}` (each redrawn until
/// positive), then `H_ij` for `i < j` row by row. `H` is clamped to `≤ 0` and
/// multiplied by `shrink` until `h + H·1 ≥ 0`.
pub fn sample_quadratic(p: &TeamFormationParams, r: &mut rng::Rng) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let hd = Normal::new(p.h_mean, p.h_std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let pd = Normal::new(p.pair_mean, p.pair_std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    if !(p.shrink > 0.0 && p.shrink < 1.0) {
        return Err(Error::InvalidConfig(format!("shrink factor must lie in (0,1), got {}", p.shrink)));
    }
    if p.h_mean + 10.0 * p.h_std <= 0.0 {
        return Err(Error::InvalidConfig("h distribution has almost no positive mass".into()));
    }
    let h: Vec<f64> = (0..p.n)
        .map(|_| loop {
            let v = hd.sample(r);
            if v > 0.0 {
                break v;
            }
        })
        .collect();
    let mut hm = vec![vec![0.0; p.n]; p.n];
    for i in 0..p.n {
        for j in i + 1..p.n {
            let v = pd.sample(r).min(0.0);
            hm[i][j] = v;
            hm[j][i] = v;
        }
    }
    loop {
        let ok = (0..p.n).all(|i| h[i] + hm[i].iter().sum::<f64>() >= 0.0);
        if ok {
            break;
        }
        for row in hm.iter_mut() {
            for v in row.iter_mut() {
                *v *= p.shrink;
            }
        }
    }
    Ok((h, hm))
}

pub fn gen_team_formation(p: &TeamFormationParams, seed: u64) -> Result<InstanceSpec> {
    if p.ell > p.n || p.k > p.n {
        return Err(Error::InvalidConfig("ℓ and k must not exceed n".into()));
    }
    let mut r = rng::from_seed(seed);
    let mut pool = Vec::with_capacity(p.m);
    for _ in 0..p.m {
        let (h, hm) = sample_quadratic(p, &mut r)?;
        pool.push(WtpFunction::from_quadratic(&h, &hm)?);
    }
    let spec = InstanceSpec {
        name: "team-formation".into(),
        n: p.n,
        ell: p.ell,
        k: p.k,
        t: p.m,
        sequence: (0..p.m).collect(),
        pool,
        matroid: None,
        sampling: Sampling::Fixed,
        seed: Some(seed),
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfluenceParams {
    pub ell: usize,
    pub k: usize,
    pub t: usize,
    pub topics: usize,
    pub topic_prob: f64,
    pub edge_prob: f64,
}

impl Default for InfluenceParams {
    fn default() -> Self {
        Self { ell: 8, k: 3, t: 100, topics: 5, topic_prob: 0.5, edge_prob: 0.25 }
    }
}

/// Independent topic assignment: `holders[v][τ]` is whether node `v` holds
/// topic `τ`. Drawn node by node, topic by topic.
pub fn assign_topics(n: usize, topics: usize, prob: f64, r: &mut rng::Rng) -> Vec<Vec<bool>> {
    (0..n).map(|_| (0..topics).map(|_| r.random_bool(prob)).collect()).collect()
}

/// Coverage function of one cascade: every node `u` in a component that
/// contains holders gets a potential `min{1, Σ_{v holder in comp(u)} y_v}`.
pub fn cascade_function(n: usize, kept: &[(usize, usize)], holder: &[bool]) -> Result<WtpFunction> {
    let mut uf = UnionFind::<usize>::new(n);
    for &(u, v) in kept {
        uf.union(u, v);
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        if holder[v] {
            members.entry(uf.find(v)).or_default().push(v);
        }
    }
    let mut potentials = Vec::new();
    for u in 0..n {
        if let Some(h) = members.get(&uf.find(u)) {
            potentials.push(ThresholdPotential::indicator(1.0, Threshold::Finite(1.0), h)?);
        }
    }
    WtpFunction::new(n, potentials)
}

/// Influence instance on an undirected graph.
///
/// Draw order: topic assignment first, then per cascade one Bernoulli per
/// edge in list order followed by the cascade's topic.
pub fn gen_influence(n: usize, edges: &[(usize, usize)], p: &InfluenceParams, seed: u64) -> Result<InstanceSpec> {
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidIndex { index: u.max(v), n });
        }
    }
    if p.topics == 0 {
        return Err(Error::InvalidConfig("at least one topic is needed".into()));
    }
    let mut r = rng::from_seed(seed);
    let holders = assign_topics(n, p.topics, p.topic_prob, &mut r);
    let mut pool = Vec::with_capacity(p.t);
    for _ in 0..p.t {
        let kept: Vec<(usize, usize)> = edges.iter().copied().filter(|_| r.random_bool(p.edge_prob)).collect();
        let topic = r.random_range(0..p.topics);
        let holder: Vec<bool> = holders.iter().map(|h| h[topic]).collect();
        pool.push(cascade_function(n, &kept, &holder)?);
    }
    let spec = InstanceSpec {
        name: "influence".into(),
        n,
        ell: p.ell,
        k: p.k,
        t: p.t,
        sequence: (0..p.t).collect(),
        pool,
        matroid: None,
        sampling: Sampling::Fixed,
        seed: Some(seed),
    };
    spec.validate()?;
    Ok(spec)
}

/// Influence on the karate club with the default sizes.
pub fn gen_influence_karate(seed: u64) -> Result<InstanceSpec> {
    gen_influence(KARATE_NODES, &KARATE_EDGES, &InfluenceParams::default(), seed)
}

/// Parse a `u v` per line edge list; blank lines and `#` comments are
/// skipped. Returns the node count (largest index + 1) and the edges.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidInstance(format!("edge list line {}: {s:?} is not a node index", lineno + 1)))
        };
        if parts.len() != 2 {
            return Err(Error::InvalidInstance(format!("edge list line {}: expected two node indices", lineno + 1)));
        }
        let (u, v) = (parse(parts[0])?, parse(parts[1])?);
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    Ok((n, edges))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(usize, Vec<(usize, usize)>)> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}
