//! Small dense linear programs
//!
//! ```text
//! maximize  c·z   subject to  A z ≤ b,  z ≥ 0
//! ```
//!
//! solved with a two-phase tableau simplex under Bland's rule. The duals of
//! the rows are read from the reduced costs of the slack columns in the final
//! tableau, so they are exactly the basic dual solution paired with the
//! returned vertex.

use crate::error::{Error, Result};

/// Entries smaller than this are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-9;
/// Residual phase-one infeasibility above which the problem is infeasible.
const FEAS_TOL: f64 = 1e-7;
/// Largest tableau (in cells) the dense solver accepts.
pub const MAX_DENSE_CELLS: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow<T> {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub tag: T,
}

/// `maximize c·z s.t. A z ≤ b, z ≥ 0`. Rows are stored sparsely and carry an
/// opaque tag so callers can find the dual of a particular constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem<T = ()> {
    c: Vec<f64>,
    rows: Vec<LpRow<T>>,
}

impl<T> LpProblem<T> {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c, rows: Vec::new() }
    }

    /// Append a variable with objective coefficient `cost`; returns its index.
    pub fn add_var(&mut self, cost: f64) -> usize {
        self.c.push(cost);
        self.c.len() - 1
    }

    pub fn add_cost(&mut self, j: usize, cost: f64) {
        self.c[j] += cost;
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn rows(&self) -> &[LpRow<T>] {
        &self.rows
    }

    /// Add `Σ coeffs · z ≤ rhs`. Repeated indices are summed.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64, tag: T) -> usize {
        self.rows.push(LpRow { coeffs, rhs, tag });
        self.rows.len() - 1
    }

    pub fn add_dense_row(&mut self, a: &[f64], rhs: f64, tag: T) -> usize {
        let coeffs = a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (j, v)).collect();
        self.add_row(coeffs, rhs, tag)
    }

    /// `A z` for a candidate `z`.
    pub fn row_activity(&self, z: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.coeffs.iter().map(|&(j, v)| v * z[j]).sum()).collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("objective has a non-finite entry".into()));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(Error::InvalidInstance(format!("row {i} has non-finite right-hand side")));
            }
            for &(j, v) in &r.coeffs {
                if j >= n {
                    return Err(Error::InvalidIndex { index: j, n });
                }
                if !v.is_finite() {
                    return Err(Error::InvalidInstance(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal `z`; empty unless optimal.
    pub primal: Vec<f64>,
    /// One nonnegative multiplier per row; empty unless optimal.
    pub dual: Vec<f64>,
    /// `c·z` at the optimum; `-inf` when infeasible, `+inf` when unbounded.
    pub objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `b·y` for the returned duals.
    pub fn dual_objective<T>(&self, p: &LpProblem<T>) -> f64 {
        p.rows.iter().zip(&self.dual).map(|(r, &y)| r.rhs * y).sum()
    }

    /// Turn a non-optimal status into an error.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::LpStatus("infeasible")),
            LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
        }
    }
}

struct Tableau {
    data: Vec<f64>,
    /// Constraint rows; the objective row sits at index `m`.
    m: usize,
    /// Columns excluding the right-hand side.
    cols: usize,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width();
        let p = self.data[r * w + s];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[s] = 1.0;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[s];
            if f != 0.0 {
                for (v, &q) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * q;
                }
                row[s] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        for i in 0..self.m {
            let idx = i * w + self.cols;
            if self.data[idx] < 0.0 && self.data[idx] > -1e-11 {
                self.data[idx] = 0.0;
            }
        }
        self.basis[r] = s;
    }

    /// Fill the objective row with reduced costs `c_j − c_B B⁻¹ A_j` and
    /// `−c_B B⁻¹ b` in the right-hand-side cell.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width();
        let m = self.m;
        let mut obj = vec![0.0; w];
        obj[..self.cols].copy_from_slice(cost);
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                for (o, &v) in obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
        for i in 0..m {
            obj[self.basis[i]] = 0.0;
        }
        self.data[m * w..(m + 1) * w].copy_from_slice(&obj);
    }

    /// Bland's rule iterations. Columns with `allowed[j] == false` never enter.
    fn run(&mut self, allowed: &[bool], pivots: &mut usize, limit: usize) -> Result<bool> {
        loop {
            let entering = (0..self.cols).find(|&j| allowed[j] && self.at(self.m, j) > PIVOT_TOL);
            let Some(s) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, s);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                            if (!tie && ratio < best) || (tie && self.basis[i] < self.basis[r]) {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            *pivots += 1;
            if *pivots > limit {
                return Err(Error::PivotLimit { pivots: limit });
            }
            self.pivot(r, s);
        }
    }
}

/// Solve `p` to optimality. Infeasible and unbounded problems are reported
/// through [`LpSolution::status`]; an error is returned only for malformed
/// input, oversized problems, or when the pivot cap `50·(rows+cols)` is hit.
pub fn solve<T>(p: &LpProblem<T>) -> Result<LpSolution> {
    p.validate()?;
    let n = p.c.len();
    let m = p.rows.len();
    let needs_art: Vec<bool> = p.rows.iter().map(|r| r.rhs < 0.0).collect();
    let na = needs_art.iter().filter(|&&b| b).count();
    let cols = n + m + na;
    let width = cols + 1;
    if (m + 1).saturating_mul(width) > MAX_DENSE_CELLS {
        return Err(Error::LpTooLarge { rows: m, cols: n });
    }

    let mut data = vec![0.0; (m + 1) * width];
    let mut basis = Vec::with_capacity(m);
    let mut next_art = n + m;
    for (i, r) in p.rows.iter().enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        let sign = if needs_art[i] { -1.0 } else { 1.0 };
        for &(j, v) in &r.coeffs {
            row[j] += sign * v;
        }
        row[n + i] = sign;
        row[cols] = sign * r.rhs;
        if needs_art[i] {
            row[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(n + i);
        }
    }
    let mut tab = Tableau { data, m, cols, basis };
    let limit = 50 * (m + n + m);
    let mut pivots = 0;

    if na > 0 {
        let mut cost = vec![0.0; cols];
        cost[n + m..].iter_mut().for_each(|c| *c = -1.0);
        tab.set_objective(&cost);
        let allowed = vec![true; cols];
        tab.run(&allowed, &mut pivots, limit)?;
        // objective cell holds −z with z = −Σ artificials
        let residual = tab.rhs(m);
        if residual > FEAS_TOL * (1.0 + max_abs_rhs(p)) {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                dual: Vec::new(),
                objective: f64::NEG_INFINITY,
                pivots,
            });
        }
        for r in 0..m {
            if tab.basis[r] >= n + m {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..n + m {
                    let a = tab.at(r, j).abs();
                    if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                        best = Some((j, a));
                    }
                }
                if let Some((j, _)) = best {
                    pivots += 1;
                    tab.pivot(r, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&p.c);
    tab.set_objective(&cost);
    let mut allowed = vec![true; cols];
    allowed[n + m..].iter_mut().for_each(|a| *a = false);
    let bounded = tab.run(&allowed, &mut pivots, limit)?;
    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            objective: f64::INFINITY,
            pivots,
        });
    }

    let mut primal = vec![0.0; n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            primal[bj] = tab.rhs(i).max(0.0);
        }
    }
    // reduced cost of slack i is −y_i, independent of the row sign flips
    let dual: Vec<f64> = (0..m).map(|i| (-tab.at(m, n + i)).max(0.0)).collect();
    let objective = p.c.iter().zip(&primal).map(|(c, z)| c * z).sum();
    Ok(LpSolution { status: LpStatus::Optimal, primal, dual, objective, pivots })
}

fn max_abs_rhs<T>(p: &LpProblem<T>) -> f64 {
    p.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max)
}
