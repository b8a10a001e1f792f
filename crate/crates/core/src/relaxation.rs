//! Concave relaxation of the second-stage reward,
//!
//! ```text
//! F̃(x̃) = max { f̃(ỹ) : ỹ ∈ P(M), ỹ ≤ x̃ },
//! ```
//!
//! evaluated through the linear program obtained by introducing one
//! auxiliary `z_j ≤ b_j, z_j ≤ w_j·ỹ` per finite-threshold potential.
//! Potentials with `b_j = ∞` enter the objective directly. The duals of the
//! coupling rows `ỹ_i ≤ x̃_i` form a supergradient of `F̃` at `x̃`.
//!
//! Only coordinates that carry weight in some potential and can be selected
//! by the matroid get a `ỹ` variable; `F̃` does not depend on the others, so
//! their supergradient entries are zero.

use microlp::{ComparisonOp, OptimizationDirection, Problem as SparseProblem};

use crate::error::{Error, Result};
use crate::linprog::{self, LpProblem, LpSolution, LpStatus, MAX_DENSE_CELLS};
use crate::matroid::{ConstraintKind, Matroid};
use crate::wtp::{Threshold, WtpFunction};

/// Coordinates of `x̃` below this value are treated as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowTag {
    Box(usize),
    Coupling(usize),
    Rank(Option<usize>),
    Uncovered,
    /// `z_j − w_j·ỹ ≤ 0`
    Potential(usize),
    /// `z_j ≤ b_j`
    Threshold(usize),
    /// `Σ x̃ ≤ ℓ` in the joint program.
    Budget,
    /// `x̃_i ≤ 1` in the joint program.
    Ground(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct RelaxedReward<'a> {
    f: &'a WtpFunction,
    m: &'a Matroid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Supergradient {
    /// Duals of the coupling rows, one per coordinate.
    pub lambda: Vec<f64>,
    /// `F̃(x̃)`.
    pub value: f64,
}

/// Everything the linear program yields at one point.
#[derive(Clone, Debug)]
pub struct RelaxedSolution {
    pub value: f64,
    /// Optimal second-stage fractional solution `ỹ`, length `n`.
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `|c·z − b·y|` of the underlying solve.
    pub duality_gap: f64,
}

impl<'a> RelaxedReward<'a> {
    pub fn new(f: &'a WtpFunction, m: &'a Matroid) -> Result<Self> {
        if f.n() != m.n() {
            return Err(Error::DimensionMismatch { expected: f.n(), got: m.n() });
        }
        Ok(Self { f, m })
    }

    pub fn function(&self) -> &WtpFunction {
        self.f
    }

    pub fn matroid(&self) -> &Matroid {
        self.m
    }

    pub fn eval(&self, xt: &[f64]) -> Result<f64> {
        Ok(self.solve(xt)?.value)
    }

    pub fn supergradient(&self, xt: &[f64]) -> Result<Supergradient> {
        let s = self.solve(xt)?;
        Ok(Supergradient { lambda: s.lambda, value: s.value })
    }

    /// Build and solve the linearized program at `x̃`.
    pub fn solve(&self, xt: &[f64]) -> Result<RelaxedSolution> {
        let n = self.f.n();
        let (lp, block) = self.program(xt)?;
        let sol = linprog::solve(&lp)?.require_optimal()?;
        let mut y = vec![0.0; n];
        for &(i, v) in &block.y_vars {
            y[i] = sol.primal[v];
        }
        let mut lambda = vec![0.0; n];
        for (r, row) in lp.rows().iter().enumerate() {
            if let RowTag::Coupling(i) = row.tag {
                lambda[i] = sol.dual[r];
            }
        }
        let duality_gap = (sol.objective - sol.dual_objective(&lp)).abs();
        Ok(RelaxedSolution { value: sol.objective, y, lambda, duality_gap })
    }

    /// The linear program whose optimum is `F̃(x̃)`.
    pub fn program(&self, xt: &[f64]) -> Result<(LpProblem<RowTag>, Block)> {
        let n = self.f.n();
        if xt.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: xt.len() });
        }
        let clamped: Vec<f64> = xt.iter().map(|&v| if v < ZERO_CLAMP { 0.0 } else { v }).collect();
        let rows = self.m.polytope_constraints(&clamped)?;
        let mut lp = LpProblem::new(Vec::new());
        let block = append_block(&mut lp, self.f, self.m, 1.0, &rows, Coupling::Fixed);
        Ok((lp, block))
    }
}

/// `G·M²·√n`, the Lipschitz constant of `F̃` over `X̃_ℓ`.
pub fn lipschitz_bound(f: &WtpFunction) -> f64 {
    let m = f.param_bound();
    f.num_potentials() as f64 * m * m * (f.n() as f64).sqrt()
}

/// Variables of one function's block inside a program.
#[derive(Clone, Debug, Default)]
pub struct Block {
    /// `(coordinate, variable)` for each `ỹ` variable.
    pub y_vars: Vec<(usize, usize)>,
}

enum Coupling<'a> {
    /// `ỹ_i ≤ x̃_i` with the right-hand sides taken from the coupling rows.
    Fixed,
    /// `ỹ_i − x̃_i ≤ 0` against shared variables; `x_vars[i]` is the variable
    /// of coordinate `i`.
    Shared(&'a [Option<usize>]),
}

fn active_coordinates(f: &WtpFunction, m: &Matroid) -> Vec<Option<usize>> {
    let mut map = vec![None; f.n()];
    for i in f.active_coordinates() {
        if m.is_selectable(i) {
            map[i] = Some(0);
        }
    }
    map
}

fn append_block(
    lp: &mut LpProblem<RowTag>,
    f: &WtpFunction,
    m: &Matroid,
    weight: f64,
    polytope: &[crate::matroid::LinearConstraint],
    coupling: Coupling<'_>,
) -> Block {
    let mut var_of = active_coordinates(f, m);
    let mut block = Block::default();
    for (i, slot) in var_of.iter_mut().enumerate() {
        if slot.is_some() {
            let v = lp.add_var(0.0);
            *slot = Some(v);
            block.y_vars.push((i, v));
        }
    }
    for row in polytope {
        match (row.kind, &coupling) {
            (ConstraintKind::Box(i), Coupling::Fixed) => {
                if let Some(v) = var_of[i] {
                    lp.add_row(vec![(v, 1.0)], row.rhs, RowTag::Box(i));
                }
            }
            (ConstraintKind::Coupling(i), Coupling::Fixed) => {
                if let Some(v) = var_of[i] {
                    lp.add_row(vec![(v, 1.0)], row.rhs, RowTag::Coupling(i));
                }
            }
            (ConstraintKind::Box(_) | ConstraintKind::Coupling(_), Coupling::Shared(_)) => {}
            (ConstraintKind::Rank(p), _) => {
                let coeffs: Vec<(usize, f64)> =
                    row.coeffs.iter().filter_map(|&(i, a)| var_of[i].map(|v| (v, a))).collect();
                if !coeffs.is_empty() {
                    lp.add_row(coeffs, row.rhs, RowTag::Rank(p));
                }
            }
            (ConstraintKind::Uncovered, _) => {}
        }
    }
    if let Coupling::Shared(x_vars) = coupling {
        for &(i, v) in &block.y_vars {
            let xv = x_vars[i].expect("shared variable for every active coordinate");
            lp.add_row(vec![(v, 1.0), (xv, -1.0)], 0.0, RowTag::Coupling(i));
        }
    }
    for (j, p) in f.potentials().iter().enumerate() {
        let terms: Vec<(usize, f64)> = p
            .indices()
            .iter()
            .zip(p.values())
            .filter_map(|(&i, &w)| var_of[i].map(|v| (v, w)))
            .collect();
        if terms.is_empty() {
            continue;
        }
        match p.b() {
            Threshold::Infinite => {
                for &(v, w) in &terms {
                    lp.add_cost(v, weight * p.c() * w);
                }
            }
            Threshold::Finite(b) if b == 0.0 => {}
            Threshold::Finite(b) => {
                let z = lp.add_var(weight * p.c());
                let mut coeffs = Vec::with_capacity(terms.len() + 1);
                coeffs.push((z, 1.0));
                coeffs.extend(terms.iter().map(|&(v, w)| (v, -w)));
                lp.add_row(coeffs, 0.0, RowTag::Potential(j));
                lp.add_row(vec![(z, 1.0)], b, RowTag::Threshold(j));
            }
        }
    }
    block
}

/// Result of maximizing `Σ_t F̃_t(x̃)` over `X̃_ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointOptimum {
    /// Optimal `Σ_t weight_t · F̃_t(x̃*)`.
    pub total: f64,
    /// Maximizer `x̃*`.
    pub x: Vec<f64>,
    /// Whether the sparse fallback solver produced the result.
    pub sparse: bool,
}

/// `max Σ_s weight_s · F̃_s(x̃)` over `x̃ ∈ [0,1]^n, Σx̃ ≤ ℓ`, solved as one
/// linear program with a shared `x̃` and a private `(ỹ, z)` block per function.
/// Identical functions should be merged by the caller into one weighted term.
///
/// The dense simplex is used when the tableau fits; larger programs go to a
/// sparse revised simplex.
pub fn maximize_sum(terms: &[(&WtpFunction, f64)], m: &Matroid, ell: f64) -> Result<JointOptimum> {
    let n = m.n();
    for (f, _) in terms {
        if f.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.n() });
        }
    }
    let mut used = vec![false; n];
    for (f, _) in terms {
        for (i, slot) in active_coordinates(f, m).iter().enumerate() {
            used[i] |= slot.is_some();
        }
    }
    let mut lp: LpProblem<RowTag> = LpProblem::new(Vec::new());
    let x_vars: Vec<Option<usize>> = used.iter().map(|&u| u.then(|| lp.add_var(0.0))).collect();
    let budget: Vec<(usize, f64)> = x_vars.iter().flatten().map(|&v| (v, 1.0)).collect();
    if !budget.is_empty() {
        lp.add_row(budget, ell, RowTag::Budget);
    }
    for (i, xv) in x_vars.iter().enumerate() {
        if let Some(v) = *xv {
            lp.add_row(vec![(v, 1.0)], 1.0, RowTag::Ground(i));
        }
    }
    let ones = vec![1.0; n];
    let polytope = m.polytope_constraints(&ones)?;
    for &(f, w) in terms {
        append_block(&mut lp, f, m, w, &polytope, Coupling::Shared(&x_vars));
    }

    let cells = (lp.num_rows() + 1) * (lp.num_vars() + 2 * lp.num_rows() + 1);
    let (total, z, sparse) = if cells <= MAX_DENSE_CELLS {
        let sol = linprog::solve(&lp)?.require_optimal()?;
        (sol.objective, sol.primal, false)
    } else {
        let (obj, z) = solve_sparse(&lp)?;
        (obj, z, true)
    };
    let x = x_vars.iter().map(|v| v.map_or(0.0, |v| z[v].clamp(0.0, 1.0))).collect();
    Ok(JointOptimum { total, x, sparse })
}

/// Primal-only solve through `microlp` for programs too large for the dense
/// tableau.
pub fn solve_sparse<T>(lp: &LpProblem<T>) -> Result<(f64, Vec<f64>)> {
    let mut problem = SparseProblem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = lp.objective().iter().map(|&c| problem.add_var(c, (0.0, f64::INFINITY))).collect();
    for row in lp.rows() {
        let mut merged: Vec<(usize, f64)> = row.coeffs.clone();
        merged.sort_by_key(|&(j, _)| j);
        merged.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        problem.add_constraint(
            merged.iter().map(|&(j, v)| (vars[j], v)).collect::<Vec<_>>(),
            ComparisonOp::Le,
            row.rhs,
        );
    }
    let outcome = problem.solve().map_err(|e| Error::SparseSolver(e.to_string()))?;
    let sol = outcome.into_solution().map_err(|_| Error::SparseSolver("solve was interrupted".into()))?;
    let z: Vec<f64> = vars.iter().map(|&v| sol.var_value(v)).collect();
    Ok((sol.objective(), z))
}

/// Solve with the dense simplex and report the solution alongside its status.
pub fn solve_dense<T>(lp: &LpProblem<T>) -> Result<LpSolution> {
    let s = linprog::solve(lp)?;
    if s.status != LpStatus::Optimal {
        return s.require_optimal();
    }
    Ok(s)
}
