//! Truncated node-adapted grids and the P1 finite element form of
//! `I(u;V) = ‖u′‖² + V(u,u)`.
//!
//! The real line is truncated to `[left, right]` with homogeneous Dirichlet
//! values at both ends. Every breakpoint of the potential, every atom and
//! every requested peak location is a grid node, so the potential is
//! constant on each element and the element integrals are exact.

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Default truncation margin in units of the slowest tail decay length.
pub const MARGIN_DECAY_LENGTHS: f64 = 25.0;
/// Default element width relative to the truncated interval.
pub const RELATIVE_H: f64 = 1e-3;
/// Default cap on `h · √max|V|`.
pub const MAX_H_SQRT_V: f64 = 0.01;

/// Resolution knobs; `None` picks the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Resolution {
    pub margin: Option<f64>,
    pub h_target: Option<f64>,
}

impl Resolution {
    pub fn new(margin: f64, h_target: f64) -> Self {
        Self { margin: Some(margin), h_target: Some(h_target) }
    }

    /// Margin `25/√v₀` with `v₀` the smaller tail value.
    pub fn margin_for(&self, p: &Potential) -> Result<f64> {
        match self.margin {
            Some(m) => Ok(m),
            None => {
                let v0 = p.tail_infimum();
                if v0 <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "tail value {v0} is not positive; no default truncation margin"
                    )));
                }
                Ok(MARGIN_DECAY_LENGTHS / v0.sqrt())
            }
        }
    }

    /// Element width: the override, or `min(10⁻³·(right−left), 0.01/√max|V|)`.
    pub fn h_for(&self, p: &Potential, left: f64, right: f64) -> f64 {
        self.h_target.unwrap_or_else(|| {
            let vmax = p.profile().all_values().fold(0.0_f64, |m, v| m.max(v.abs()));
            let by_width = RELATIVE_H * (right - left);
            if vmax > 0.0 {
                by_width.min(MAX_H_SQRT_V / vmax.sqrt())
            } else {
                by_width
            }
        })
    }

    /// Grid with every peak as a node, built at this resolution. The
    /// element width is chosen from the final truncated interval.
    pub fn grid(&self, p: &Potential, peaks: &[f64]) -> Result<Grid> {
        let margin = self.margin_for(p)?;
        let (lo, hi) = peaks
            .iter()
            .copied()
            .fold(p.support_hull().unwrap_or((f64::INFINITY, f64::NEG_INFINITY)), |(lo, hi), a| (lo.min(a), hi.max(a)));
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInput("at least one finite peak location is required".into()));
        }
        let h = self.h_for(p, lo - margin, hi + margin);
        Grid::build(p, peaks, margin, h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    peak_index: usize,
    margin: f64,
    core: (f64, f64),
}

/// Grid for a single peak location `a`.
pub fn build_grid(p: &Potential, a: f64, margin: f64, h_target: f64) -> Result<Grid> {
    Grid::build(p, &[a], margin, h_target)
}

impl Grid {
    /// Grid containing every breakpoint, atom and each of `peaks` as nodes.
    /// `peak_index` refers to `peaks[0]`.
    pub fn build(p: &Potential, peaks: &[f64], margin: f64, h_target: f64) -> Result<Grid> {
        if !(h_target > 0.0 && h_target.is_finite()) {
            return Err(Error::InvalidInput(format!("h_target must be positive, got {h_target}")));
        }
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(Error::InvalidInput(format!("margin must be positive, got {margin}")));
        }
        let Some(&first_peak) = peaks.first() else {
            return Err(Error::InvalidInput("at least one peak location is required".into()));
        };
        if peaks.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("peak location must be finite".into()));
        }

        let profile = p.profile();
        let mut required: Vec<f64> = profile
            .breakpoints()
            .iter()
            .copied()
            .chain(p.atoms().iter().map(|a| a.location))
            .chain(peaks.iter().copied())
            .collect();
        let core_lo = required.iter().copied().fold(f64::INFINITY, f64::min);
        let core_hi = required.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (left, right) = (core_lo - margin, core_hi + margin);
        required.push(left);
        required.push(right);
        required.sort_by(f64::total_cmp);
        required.dedup();

        let mut nodes = Vec::new();
        for w in required.windows(2) {
            let (s, e) = (w[0], w[1]);
            let n = ((e - s) / h_target - 1e-9).ceil().max(1.0) as usize;
            nodes.extend((0..n).map(|i| s + (e - s) * i as f64 / n as f64));
        }
        nodes.push(right);

        let peak_index = exact_index(&nodes, first_peak).expect("peak inserted as node");
        Ok(Grid { nodes, peak_index, margin, core: (core_lo, core_hi) })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn peak_index(&self) -> usize {
        self.peak_index
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Hull of the support of the non-constant part and the peaks.
    pub fn core(&self) -> (f64, f64) {
        self.core
    }

    /// Index of the node equal to `x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        exact_index(&self.nodes, x)
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_width(&self) -> f64 {
        self.widths().fold(0.0, f64::max)
    }

    /// Same nodes with the peak moved to the node at `a`.
    pub fn with_peak(&self, a: f64) -> Result<Grid> {
        let peak_index =
            self.node_index(a).ok_or_else(|| Error::InvalidInput(format!("peak {a} is not a grid node")))?;
        Ok(Grid { peak_index, ..self.clone() })
    }

    /// Bisect every element. The coarse nodes stay nodes, so the P1 space
    /// of the result contains the P1 space of `self`.
    pub fn refined(&self) -> Grid {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.right());
        Grid { nodes, peak_index: 2 * self.peak_index, ..self.clone() }
    }
}

fn exact_index(nodes: &[f64], x: f64) -> Option<usize> {
    let i = nodes.partition_point(|&n| n < x);
    (i < nodes.len() && nodes[i] == x).then_some(i)
}

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![0.0; n], off: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Row `i` of `A u`.
    #[inline]
    pub fn row_dot(&self, i: usize, u: &[f64]) -> f64 {
        let mut s = self.diag[i] * u[i];
        if i > 0 {
            s += self.off[i - 1] * u[i - 1];
        }
        if i + 1 < self.diag.len() {
            s += self.off[i] * u[i + 1];
        }
        s
    }

    /// `Σ_j |A_ij|`.
    #[inline]
    pub fn row_abs_sum(&self, i: usize) -> f64 {
        let mut s = self.diag[i].abs();
        if i > 0 {
            s += self.off[i - 1].abs();
        }
        if i + 1 < self.diag.len() {
            s += self.off[i].abs();
        }
        s
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.row_dot(i, u)).collect()
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Discrete `I(u;V)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    stiffness: Tridiagonal,
    weighted_mass: Tridiagonal,
    atom_diag: Vec<f64>,
    operator: Tridiagonal,
    widths: Vec<f64>,
    element_potential: Vec<f64>,
}

/// Assemble stiffness, consistent mass weighted by `V₀ + ρ`, and the atom
/// diagonal.
pub fn assemble(p: &Potential, g: &Grid) -> Result<QuadraticForm> {
    let n = g.len();
    let profile = p.profile();
    let mut stiffness = Tridiagonal::zeros(n);
    let mut weighted_mass = Tridiagonal::zeros(n);
    let mut widths = Vec::with_capacity(n - 1);
    let mut element_potential = Vec::with_capacity(n - 1);

    for (e, w) in g.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        let v = profile.value_at(0.5 * (w[0] + w[1]));
        stiffness.diag[e] += 1.0 / h;
        stiffness.diag[e + 1] += 1.0 / h;
        stiffness.off[e] -= 1.0 / h;
        weighted_mass.diag[e] += v * h / 3.0;
        weighted_mass.diag[e + 1] += v * h / 3.0;
        weighted_mass.off[e] += v * h / 6.0;
        widths.push(h);
        element_potential.push(v);
    }

    let mut atom_diag = vec![0.0; n];
    for atom in p.atoms() {
        let i = g.node_index(atom.location).ok_or(Error::AssemblyContract(atom.location))?;
        atom_diag[i] += atom.weight;
    }

    let mut operator = stiffness.add(&weighted_mass);
    for (d, w) in operator.diag.iter_mut().zip(&atom_diag) {
        *d += w;
    }
    Ok(QuadraticForm { stiffness, weighted_mass, atom_diag, operator, widths, element_potential })
}

impl QuadraticForm {
    pub fn len(&self) -> usize {
        self.atom_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_diag.is_empty()
    }

    pub fn stiffness(&self) -> &Tridiagonal {
        &self.stiffness
    }

    pub fn weighted_mass(&self) -> &Tridiagonal {
        &self.weighted_mass
    }

    pub fn atom_diag(&self) -> &[f64] {
        &self.atom_diag
    }

    /// `stiffness + weighted_mass + diag(atom_diag)`.
    pub fn operator(&self) -> &Tridiagonal {
        &self.operator
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Value of `V₀ + ρ` on each element.
    pub fn element_potential(&self) -> &[f64] {
        &self.element_potential
    }

    /// `uᵀ(K + M + D)u`, summed element by element.
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.len() {
            return Err(Error::InvalidInput(format!("vector has {} entries, grid has {} nodes", u.len(), self.len())));
        }
        Ok(self.energy_unchecked(u))
    }

    pub(crate) fn energy_unchecked(&self, u: &[f64]) -> f64 {
        let elements: f64 = u
            .windows(2)
            .zip(self.widths.iter().zip(&self.element_potential))
            .map(|(w, (&h, &v))| {
                let d = w[1] - w[0];
                d * d / h + v * h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1])
            })
            .sum();
        let atoms: f64 = u.iter().zip(&self.atom_diag).map(|(x, w)| w * x * x).sum();
        elements + atoms
    }
}

/// `(‖u′‖², ‖u‖²)` of the piecewise-linear interpolant.
pub fn h1_parts(u: &[f64], g: &Grid) -> (f64, f64) {
    u.windows(2).zip(g.widths()).fold((0.0, 0.0), |(d, m), (w, h)| {
        let du = w[1] - w[0];
        (d + du * du / h, m + h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]))
    })
}

/// Check `max|u| ≤ ‖u‖_{H¹}/√2` for the piecewise-linear interpolant.
/// The bound is sharp, so only rounding slack is allowed.
pub fn embedding_check(u: &[f64], g: &Grid) -> bool {
    let (grad, mass) = h1_parts(u, g);
    let sup = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    sup <= ((grad + mass) / 2.0).sqrt() * (1.0 + 1e-12) + 1e-300
}
