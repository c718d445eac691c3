//! Sharp constants for the L∞ Sobolev-type inequality
//!
//! ```text
//! ‖u‖∞ ≤ C · I(u;V)^{1/2},   I(u;V) = ‖u′‖²_{L²} + V(u,u),
//! ```
//!
//! on the real line, for generalized potentials `V = V₀ + V₁` made of a
//! bounded piecewise-constant part, a compactly supported piecewise-constant
//! density and a finite list of Dirac atoms.
//!
//! The minimal value `m(V) = inf R(u;V)` of the quotient `I(u;V)/‖u‖²∞` is
//! computed in two steps. The inner step fixes the peak location `a` and
//! minimizes the energy over `K_a = {u : u(a) = ‖u‖∞ = 1}`, giving `F(a;V)`;
//! the outer step minimizes `F(·;V)` over `a`. The best constant is then
//! `m(V)^{-1/2}` whenever `m(V) > 0`.
//!
//! Modules:
//!
//! * [`potential`]: the potential data model and measure arithmetic.
//! * [`discretization`]: node-adapted grids and the P1 quadratic form.
//! * [`inner`]: `F(a;V)` by a pinned linear solve, a projected-SOR obstacle
//!   solver, and an exact grid-free transfer-matrix method.
//! * [`outer`]: sweeps over `a`, golden-section refinement, `m(V)`.
//! * [`analysis`]: closed forms and inequality checks that bound `m(V)`.
//! * [`export`]: CSV writers for profiles, sweeps and bound reports.

pub mod analysis;
pub mod discretization;
mod error;
pub mod export;
pub mod inner;
pub mod outer;
pub mod potential;

pub use analysis::{BoundReport, Theorem};
pub use discretization::{assemble, build_grid, Grid, QuadraticForm, Resolution, Tridiagonal};
pub use error::{Error, Result};
pub use export::Summary;
pub use inner::{InnerOptions, InnerProblem, InnerSolution, Method, MethodChoice, SolveCertificate};
pub use outer::{
    Attainment, Edge, OuterOptions, OuterResult, PointStatus, RefineCertificate, SweepResult, TrappedRow, WellParams,
};

pub use potential::{Atom, BoundedPart, DensityPart, Measure, PiecewiseConstant, Potential};
