//! Online two-stage submodular maximization over weighted threshold
//! potential (WTP) objectives.
//!
//! The online learner keeps a fractional restricted ground set in
//! `{x ∈ [0,1]^n : Σx ≤ ℓ}`, rounds it with randomized pipage rounding, and
//! updates it from supergradients of the concave relaxation
//! `F̃(x̃) = max { f̃(ỹ) : ỹ ∈ P(M), ỹ ≤ x̃ }`, which are read off the duals of
//! a small linear program.
//!
//! Module map:
//! - [`wtp`]: WTP functions and their constructors.
//! - [`matroid`]: uniform and partition matroids.
//! - [`linprog`]: dense two-phase simplex with duals.
//! - [`relaxation`]: `F̃` and its supergradient.
//! - [`oco`]: projected gradient ascent and FTRL policies.
//! - [`pipage`]: randomized pipage rounding.
//! - [`oracle`]: second-stage reward `F(x)` and offline optima.
//! - [`baselines`]: reference algorithms.
//! - [`datasets`]: instance generators and the JSON instance format.
//! - [`harness`]: experiment runner, metrics and CSV output.
//! - [`guarantees`]: approximation constants.

pub mod baselines;
pub mod datasets;
pub mod error;
pub mod guarantees;
pub mod harness;
pub mod linprog;
pub mod matroid;
pub mod oco;
pub mod oracle;
pub mod pipage;
pub mod relaxation;
pub mod rng;
pub mod wtp;

pub use error::{Error, Result};
pub use matroid::{Matroid, MatroidKind};
pub use wtp::{IntegralSet, Threshold, ThresholdPotential, WtpFunction};

/// Absolute tolerance used for reward comparisons.
pub const TOL: f64 = 1e-9;
