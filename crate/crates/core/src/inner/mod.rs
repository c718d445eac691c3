//! The inner problem `F(a;V) = inf { I(u;V) : u ∈ K_a }` with
//! `K_a = { u : u(a) = ‖u‖∞ = 1 }`.
//!
//! Three methods are available:
//!
//! * [`solve_linear`]: pin `u(a) = 1`, solve the two tridiagonal systems
//!   and verify `0 ≤ u ≤ 1` afterwards. Valid when no contact occurs.
//! * [`solve_obstacle`]: minimize over the box `−1 ≤ u ≤ 1` by projected
//!   SOR with active-set polishing (projected gradient when a diagonal entry
//!   is not positive). Always applicable.
//! * [`solve_transfer`]: exact piecewise closed form on the real line,
//!   independent of any grid. Valid when no contact occurs.

mod check;
mod linear;
mod obstacle;
mod transfer;

use std::fmt;

pub use check::{positivity_and_ode_check, CheckReport};
pub use linear::solve_linear;
pub use obstacle::{solve_obstacle, solve_obstacle_warm};
pub use transfer::{solve_transfer, TransferSolution};

use crate::discretization::{Grid, QuadraticForm, Tridiagonal};
use crate::error::{Error, Result};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Linear,
    Obstacle,
    Transfer,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Linear => "linear",
            Method::Obstacle => "obstacle",
            Method::Transfer => "transfer",
        })
    }
}

/// Method selection; `Auto` tries the linear solve and falls back to the
/// obstacle solver when it does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Linear,
    Obstacle,
    Transfer,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "linear" => Ok(Self::Linear),
            "obstacle" => Ok(Self::Obstacle),
            "transfer" => Ok(Self::Transfer),
            other => Err(Error::InvalidInput(format!("unknown method '{other}'"))),
        }
    }
}

/// What a solution certifies about `F(a;V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveCertificate {
    /// Reduced matrix positive definite: the discrete problem is convex and
    /// the solution is its global minimizer.
    Global,
    /// Stationary point of a possibly non-convex problem.
    KktPoint,
    /// Grid-free closed form.
    Exact,
    /// Iteration budget exhausted; the value is only an upper bound.
    NotConverged,
}

impl fmt::Display for SolveCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveCertificate::Global => "global",
            SolveCertificate::KktPoint => "kkt-point",
            SolveCertificate::Exact => "exact",
            SolveCertificate::NotConverged => "not-converged",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOptions {
    /// Bound on the scaled KKT residual.
    pub tol: f64,
    /// Slack on `|u| ≤ 1` and for deciding contact.
    pub feasibility: f64,
    /// Budget of relaxation sweeps (or gradient steps).
    pub max_iter: usize,
    /// SOR relaxation factor.
    pub omega: f64,
    /// Sweeps between two active-set polishing attempts.
    pub sweeps_per_round: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { tol: 1e-8, feasibility: 1e-12, max_iter: 1_000_000, omega: 1.5, sweeps_per_round: 10 }
    }
}

/// A discrete inner problem: the form, its grid and the pinned peak node.
#[derive(Debug, Clone, Copy)]
pub struct InnerProblem<'a> {
    pub form: &'a QuadraticForm,
    pub grid: &'a Grid,
    pub peak_index: usize,
}

impl<'a> InnerProblem<'a> {
    pub fn new(form: &'a QuadraticForm, grid: &'a Grid) -> Self {
        Self { form, grid, peak_index: grid.peak_index() }
    }

    pub fn at(form: &'a QuadraticForm, grid: &'a Grid, peak_index: usize) -> Result<Self> {
        if peak_index == 0 || peak_index + 1 >= grid.len() {
            return Err(Error::InvalidInput(format!("peak index {peak_index} is not an interior node")));
        }
        Ok(Self { form, grid, peak_index })
    }

    pub fn peak(&self) -> f64 {
        self.grid.nodes()[self.peak_index]
    }

    fn fixed_values(&self) -> Vec<Option<f64>> {
        let n = self.grid.len();
        let mut fixed = vec![None; n];
        fixed[0] = Some(0.0);
        fixed[n - 1] = Some(0.0);
        fixed[self.peak_index] = Some(1.0);
        fixed
    }
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub peak_index: usize,
    /// `F(a;V)`, or an upper bound for it when not converged.
    pub value: f64,
    /// Nodes other than the peak where `u = 1`.
    pub contact_set: Vec<usize>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub method: Method,
    pub certificate: SolveCertificate,
}

impl InnerSolution {
    pub fn converged(&self) -> bool {
        self.certificate != SolveCertificate::NotConverged
    }

    pub fn peak(&self) -> f64 {
        self.nodes[self.peak_index]
    }

    fn from_vector(
        pr: &InnerProblem<'_>,
        u: Vec<f64>,
        opts: &InnerOptions,
        iterations: usize,
        method: Method,
        certificate: SolveCertificate,
    ) -> Self {
        let value = pr.form.energy_unchecked(&u);
        let kkt_residual = kkt_residual(pr.form.operator(), &u, pr.peak_index, opts.feasibility);
        let contact_set = contact_set(&u, pr.peak_index, opts.feasibility);
        InnerSolution {
            nodes: pr.grid.nodes().to_vec(),
            u,
            peak_index: pr.peak_index,
            value,
            contact_set,
            kkt_residual,
            iterations,
            method,
            certificate,
        }
    }
}

/// Solve with the requested method. `Auto` falls back from the linear solve
/// to the obstacle solver when the former is inapplicable.
pub fn solve_with(
    p: &Potential,
    pr: &InnerProblem<'_>,
    choice: MethodChoice,
    opts: &InnerOptions,
) -> Result<InnerSolution> {
    match choice {
        MethodChoice::Auto => match solve_linear(pr, opts) {
            Err(Error::MethodInapplicable(_)) => solve_obstacle(pr, opts),
            other => other,
        },
        MethodChoice::Linear => solve_linear(pr, opts),
        MethodChoice::Obstacle => solve_obstacle(pr, opts),
        MethodChoice::Transfer => Ok(solve_transfer(p, pr.peak())?.sample(pr.grid, opts)),
    }
}

/// Interior nodes except the peak with `u ≥ 1 − slack`.
pub(crate) fn contact_set(u: &[f64], peak: usize, slack: f64) -> Vec<usize> {
    (1..u.len().saturating_sub(1)).filter(|&i| i != peak && u[i] >= 1.0 - slack).collect()
}

/// Largest violation of stationarity, sign conditions and feasibility.
///
/// With `g = A u`, free nodes need `g_i = 0`, nodes at `u_i = 1` need
/// `g_i ≤ 0` and nodes at `u_i = −1` need `g_i ≥ 0`. Violations are scaled
/// by the row norm `Σ_j |A_ij|`.
pub(crate) fn kkt_residual(op: &Tridiagonal, u: &[f64], peak: usize, feasibility: f64) -> f64 {
    let n = u.len();
    let mut r = 0.0_f64;
    for i in 1..n - 1 {
        r = r.max(u[i].abs() - 1.0);
        if i == peak {
            continue;
        }
        let g = op.row_dot(i, u);
        let viol = if u[i] >= 1.0 - feasibility {
            g.max(0.0)
        } else if u[i] <= -1.0 + feasibility {
            (-g).max(0.0)
        } else {
            g.abs()
        };
        r = r.max(viol / op.row_abs_sum(i));
    }
    r
}

/// A pivot of the symmetric tridiagonal elimination was not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NonPositivePivot(pub usize);

/// Solve `A_FF u_F = −A_FB u_B` for the free nodes, with the fixed nodes
/// taking the given values. Free blocks must be positive definite.
pub(crate) fn solve_pinned(op: &Tridiagonal, fixed: &[Option<f64>]) -> std::result::Result<Vec<f64>, NonPositivePivot> {
    let n = op.len();
    // modified super-diagonal and right-hand side after forward elimination
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut prev_free = false;
    for i in 0..n {
        if let Some(v) = fixed[i] {
            c[i] = 0.0;
            d[i] = v;
            prev_free = false;
            continue;
        }
        let mut rhs = 0.0;
        let mut diag = op.diag[i];
        if i > 0 {
            match fixed[i - 1] {
                Some(v) => rhs -= op.off[i - 1] * v,
                None => {
                    debug_assert!(prev_free);
                    diag -= op.off[i - 1] * c[i - 1];
                    rhs -= op.off[i - 1] * d[i - 1];
                }
            }
        }
        if !(diag > 0.0) {
            return Err(NonPositivePivot(i));
        }
        let sup = if i + 1 < n {
            match fixed[i + 1] {
                Some(v) => {
                    rhs -= op.off[i] * v;
                    0.0
                }
                None => op.off[i],
            }
        } else {
            0.0
        };
        c[i] = sup / diag;
        d[i] = rhs / diag;
        prev_free = true;
    }
    let mut u = d;
    for i in (0..n.saturating_sub(1)).rev() {
        if fixed[i].is_none() {
            u[i] -= c[i] * u[i + 1];
        }
    }
    Ok(u)
}

/// Positive definiteness of the matrix restricted to the free nodes.
pub(crate) fn free_blocks_spd(op: &Tridiagonal, fixed: &[Option<f64>]) -> bool {
    let n = op.len();
    let mut pivot_prev: Option<f64> = None;
    for i in 0..n {
        if fixed[i].is_some() {
            pivot_prev = None;
            continue;
        }
        let pivot = match pivot_prev {
            Some(p) => op.diag[i] - op.off[i - 1] * op.off[i - 1] / p,
            None => op.diag[i],
        };
        if !(pivot > 0.0) {
            return false;
        }
        pivot_prev = Some(pivot);
    }
    true
}
