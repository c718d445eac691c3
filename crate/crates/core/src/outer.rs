//! Outer minimization `m(V) = inf_a F(a;V)`.
//!
//! A sweep evaluates `F` at uniformly spaced peak locations on one shared
//! grid that carries every sampled `a` as a node, so all values come from
//! the same discrete space and can be compared directly. An interior
//! sampled minimum is then refined by golden-section search over the grid
//! nodes of the bracket; a minimum at a window edge is classified instead.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{assemble, Grid, QuadraticForm, Resolution};
use crate::error::{Error, Result};
use crate::inner::{solve_transfer, solve_with, InnerOptions, InnerProblem, MethodChoice, SolveCertificate};
use crate::potential::Potential;

/// Default window extension beyond the support hull, in decay lengths.
pub const WINDOW_DECAY_LENGTHS: f64 = 10.0;
/// Default number of sweep intervals.
pub const SWEEP_INTERVALS: usize = 200;
/// Samples next to an edge minimum that must be monotone toward it.
pub const EDGE_RUN: usize = 5;
const TIE_RELATIVE: f64 = 1e-11;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Two values closer than this count as equal.
pub fn tie_tolerance(f: f64) -> f64 {
    TIE_RELATIVE * f.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Edge::Left => "left",
            Edge::Right => "right",
        })
    }
}

/// Where the sampled minimum of `F` sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attainment {
    /// Strictly inside the window.
    Interior,
    /// At an edge, with `F` monotone toward it over the last
    /// [`EDGE_RUN`] samples: the infimum is likely approached as `a → ±∞`.
    BoundarySuspect(Edge),
    /// At an edge without a monotone approach; widen the window.
    WindowEdge(Edge),
}

impl Attainment {
    pub fn edge(&self) -> Option<Edge> {
        match *self {
            Attainment::Interior => None,
            Attainment::BoundarySuspect(e) | Attainment::WindowEdge(e) => Some(e),
        }
    }

    pub fn is_interior(&self) -> bool {
        *self == Attainment::Interior
    }

    pub fn is_boundary_suspect(&self) -> bool {
        matches!(self, Attainment::BoundarySuspect(_))
    }
}

impl fmt::Display for Attainment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attainment::Interior => "interior",
            Attainment::BoundarySuspect(_) => "boundary-suspect",
            Attainment::WindowEdge(_) => "window-edge",
        })
    }
}

/// Outcome of one inner evaluation inside a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Solved(SolveCertificate),
    Failed(Error),
}

impl PointStatus {
    /// The value is an upper bound for `m(V)`. Budget-exhausted obstacle
    /// iterates are feasible, so they count.
    pub fn is_usable(&self) -> bool {
        matches!(self, PointStatus::Solved(_))
    }

    pub fn is_flagged(&self) -> bool {
        !matches!(self, PointStatus::Solved(c) if *c != SolveCertificate::NotConverged)
    }
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointStatus::Solved(c) => c.fmt(f),
            PointStatus::Failed(_) => f.write_str("failed"),
        }
    }
}

/// Sampled `F(a;V)` over a window. Failed points carry `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub a_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub status: Vec<PointStatus>,
    /// Largest element width of the shared grid.
    pub h: f64,
    pub nodes: usize,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.a_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_values.is_empty()
    }

    pub fn flagged(&self) -> usize {
        self.status.iter().filter(|s| s.is_flagged()).count()
    }

    /// Index of the smallest usable value; ties go to the smallest `a`.
    pub fn best(&self) -> Option<usize> {
        let min = self.min_value()?;
        (0..self.len()).find(|&i| self.status[i].is_usable() && self.f_values[i] <= min + tie_tolerance(min))
    }

    pub fn min_value(&self) -> Option<f64> {
        (0..self.len()).filter(|&i| self.status[i].is_usable()).map(|i| self.f_values[i]).min_by(f64::total_cmp)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.f_values.windows(2).all(|w| w[1] > w[0])
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.f_values.windows(2).all(|w| w[1] < w[0])
    }

    /// Piecewise-linear interpolant of the sampled values.
    pub fn interpolate(&self, a: f64) -> f64 {
        let xs = &self.a_values;
        let n = xs.len();
        if n == 1 || a <= xs[0] {
            return self.f_values[0];
        }
        if a >= xs[n - 1] {
            return self.f_values[n - 1];
        }
        let i = xs.partition_point(|&x| x <= a).min(n - 1);
        let t = (a - xs[i - 1]) / (xs[i] - xs[i - 1]);
        self.f_values[i - 1] + t * (self.f_values[i] - self.f_values[i - 1])
    }

    /// Largest jump between neighbouring samples.
    pub fn modulus(&self) -> f64 {
        self.f_values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefineCertificate {
    /// Golden-section search over a unimodal bracket.
    Golden,
    /// The bracket was not unimodal; the best sampled point is reported.
    SampledMin,
    /// Edge minimum, nothing to refine.
    Unrefined,
}

impl fmt::Display for RefineCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefineCertificate::Golden => "golden",
            RefineCertificate::SampledMin => "sampled-min",
            RefineCertificate::Unrefined => "unrefined",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub a_star: f64,
    pub f_star: f64,
    /// Width of the final bracket.
    pub width: f64,
    pub certificate: RefineCertificate,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterResult {
    /// Smallest `F` over every evaluated point.
    pub m_estimate: f64,
    /// Smallest `a` whose value ties with `m_estimate`.
    pub argmin: f64,
    pub attained: Attainment,
    pub refinement: RefineCertificate,
    pub refinement_width: f64,
    /// Inner certificate at the argmin.
    pub certificate: SolveCertificate,
    /// Every evaluated `a` whose value ties with `m_estimate`, ascending.
    pub near_minima: Vec<f64>,
    pub window: (f64, f64),
    pub sweep: SweepResult,
}

impl OuterResult {
    /// Direction in which the infimum seems to escape.
    pub fn escape(&self) -> Option<Edge> {
        match self.attained {
            Attainment::BoundarySuspect(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterOptions {
    /// `None` picks the support hull extended by `10/√v₀`.
    pub window: Option<(f64, f64)>,
    /// `None` picks the window width over 200.
    pub step: Option<f64>,
    pub resolution: Resolution,
    pub method: MethodChoice,
    pub inner: InnerOptions,
    /// Stop refining below this bracket width; `0` refines to single nodes.
    pub target_width: f64,
}

impl Default for OuterOptions {
    fn default() -> Self {
        Self {
            window: None,
            step: None,
            resolution: Resolution::default(),
            method: MethodChoice::Auto,
            inner: InnerOptions::default(),
            target_width: 0.0,
        }
    }
}

/// Support hull extended by `10/√v₀` on each side, `v₀` the smaller tail.
pub fn default_window(p: &Potential) -> Result<(f64, f64)> {
    let v0 = p.tail_infimum();
    if v0 <= 0.0 {
        return Err(Error::InvalidPotential(format!(
            "tail value {v0} is not positive; give the sweep window explicitly"
        )));
    }
    let ext = WINDOW_DECAY_LENGTHS / v0.sqrt();
    let (lo, hi) = p.support_hull().unwrap_or((0.0, 0.0));
    Ok((lo - ext, hi + ext))
}

/// Uniform samples of `[lo, hi]` including both ends, spacing at most `step`.
pub fn sample_points(window: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidInput(format!("window [{lo}, {hi}] is empty or not finite")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    let n = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize;
    let mut xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    xs.push(hi);
    Ok(xs)
}

/// Shared discretization for evaluating `F` at many peaks.
struct Evaluator<'p> {
    potential: &'p Potential,
    grid: Grid,
    form: QuadraticForm,
    method: MethodChoice,
    inner: InnerOptions,
}

impl<'p> Evaluator<'p> {
    fn new(p: &'p Potential, peaks: &[f64], opts: &OuterOptions) -> Result<Self> {
        let grid = opts.resolution.grid(p, peaks)?;
        let form = assemble(p, &grid)?;
        Ok(Self { potential: p, grid, form, method: opts.method, inner: opts.inner.clone() })
    }

    fn at_node(&self, j: usize) -> (f64, PointStatus) {
        let result = if self.method == MethodChoice::Transfer {
            solve_transfer(self.potential, self.grid.nodes()[j]).map(|t| (t.value(), SolveCertificate::Exact))
        } else {
            InnerProblem::at(&self.form, &self.grid, j)
                .and_then(|pr| solve_with(self.potential, &pr, self.method, &self.inner))
                .map(|s| (s.value, s.certificate))
        };
        match result {
            Ok((v, c)) => (v, PointStatus::Solved(c)),
            Err(e) => (f64::NAN, PointStatus::Failed(e)),
        }
    }

    fn index(&self, a: f64) -> usize {
        self.grid.node_index(a).expect("sample inserted as node")
    }

    fn sweep(&self, a_values: &[f64]) -> SweepResult {
        let results: Vec<(f64, PointStatus)> = a_values.par_iter().map(|&a| self.at_node(self.index(a))).collect();
        let (f_values, status) = results.into_iter().unzip();
        SweepResult { a_values: a_values.to_vec(), f_values, status, h: self.grid.max_width(), nodes: self.grid.len() }
    }

    /// Golden-section search over the node indices of `[lo, hi]`. Every
    /// evaluation is recorded in `seen`.
    fn golden(
        &self,
        lo: usize,
        hi: usize,
        target: f64,
        seen: &mut BTreeMap<usize, (f64, PointStatus)>,
    ) -> (usize, usize) {
        let nodes = self.grid.nodes();
        let value = |j: usize, seen: &mut BTreeMap<usize, (f64, PointStatus)>| {
            let (v, s) = seen.entry(j).or_insert_with(|| self.at_node(j)).clone();
            if s.is_usable() {
                v
            } else {
                f64::INFINITY
            }
        };
        let (mut a, mut b) = (lo, hi);
        while b - a > 2 && nodes[b] - nodes[a] > target {
            let span = (b - a) as f64;
            let mut c = b - (INV_PHI * span).round() as usize;
            let mut d = a + (INV_PHI * span).round() as usize;
            c = c.clamp(a + 1, b - 2);
            d = d.clamp(c + 1, b - 1);
            if value(c, seen) <= value(d, seen) {
                b = d;
            } else {
                a = c;
            }
        }
        (a, b)
    }
}

/// Sample `F(·;V)` on `window` with spacing at most `step`. Points whose
/// inner solve fails are flagged and the sweep continues.
pub fn sweep(p: &Potential, window: (f64, f64), step: f64, opts: &OuterOptions) -> Result<SweepResult> {
    let a_values = sample_points(window, step)?;
    let ev = Evaluator::new(p, &a_values, opts)?;
    Ok(ev.sweep(&a_values))
}

/// Values sampled during a search, in increasing `a`, must fall and then
/// rise, up to ties.
fn is_valley(values: &[f64]) -> bool {
    let Some(k) = (0..values.len()).min_by(|&i, &j| values[i].total_cmp(&values[j])) else {
        return true;
    };
    let tol = tie_tolerance(values[k]);
    values[..=k].windows(2).all(|w| w[1] <= w[0] + tol) && values[k..].windows(2).all(|w| w[1] + tol >= w[0])
}

/// Golden-section refinement of `F` on `bracket`, on a grid that carries
/// the bracket ends and midpoint as nodes. The bracket must hold an
/// interior minimum; otherwise the best of the three samples comes back
/// flagged `sampled-min`.
pub fn refine(p: &Potential, bracket: (f64, f64), target_width: f64, opts: &OuterOptions) -> Result<Refinement> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("bracket [{lo}, {hi}] is empty or not finite")));
    }
    let mid = 0.5 * (lo + hi);
    let ev = Evaluator::new(p, &[lo, mid, hi], opts)?;
    let (ilo, imid, ihi) = (ev.index(lo), ev.index(mid), ev.index(hi));
    let mut seen = BTreeMap::new();
    for j in [ilo, imid, ihi] {
        seen.insert(j, ev.at_node(j));
    }
    let fmid = seen[&imid].0;
    let tol = tie_tolerance(fmid);
    let bracketed = seen.values().all(|(_, s)| s.is_usable()) && fmid + tol < seen[&ilo].0 && fmid + tol < seen[&ihi].0;
    let (a, b, certificate) = if bracketed {
        let (a, b) = ev.golden(ilo, ihi, target_width, &mut seen);
        (a, b, RefineCertificate::Golden)
    } else {
        (ilo, ihi, RefineCertificate::SampledMin)
    };
    let (j, f_star) = best_seen(&seen).ok_or(Error::AllPointsFailed)?;
    let valley: Vec<f64> = seen.values().filter(|(_, s)| s.is_usable()).map(|(v, _)| *v).collect();
    let certificate = if certificate == RefineCertificate::Golden && !is_valley(&valley) {
        RefineCertificate::SampledMin
    } else {
        certificate
    };
    let nodes = ev.grid.nodes();
    Ok(Refinement { a_star: nodes[j], f_star, width: nodes[b] - nodes[a], certificate, evaluations: seen.len() })
}

fn best_seen(seen: &BTreeMap<usize, (f64, PointStatus)>) -> Option<(usize, f64)> {
    let min = seen.values().filter(|(_, s)| s.is_usable()).map(|(v, _)| *v).min_by(f64::total_cmp)?;
    seen.iter().find(|(_, (v, s))| s.is_usable() && *v <= min + tie_tolerance(min)).map(|(&j, (v, _))| (j, *v))
}

/// `m(V)` by a sweep over the window followed by refinement of an interior
/// minimum.
pub fn minimize(p: &Potential, opts: &OuterOptions) -> Result<OuterResult> {
    let window = match opts.window {
        Some(w) => w,
        None => default_window(p)?,
    };
    let step = opts.step.unwrap_or_else(|| {
        let width = window.1 - window.0;
        if width > 0.0 {
            width / SWEEP_INTERVALS as f64
        } else {
            1.0
        }
    });
    let a_values = sample_points(window, step)?;
    let ev = Evaluator::new(p, &a_values, opts)?;
    let sweep = ev.sweep(&a_values);
    let best = sweep.best().ok_or(Error::AllPointsFailed)?;
    let n = sweep.len();

    let attained = if n > 1 && best == 0 {
        edge_attainment(&sweep.f_values, &sweep.status, Edge::Left)
    } else if n > 1 && best == n - 1 {
        let rev_f: Vec<f64> = sweep.f_values.iter().rev().copied().collect();
        let rev_s: Vec<PointStatus> = sweep.status.iter().rev().cloned().collect();
        edge_attainment(&rev_f, &rev_s, Edge::Right)
    } else if n == 1 {
        Attainment::WindowEdge(Edge::Left)
    } else {
        Attainment::Interior
    };

    let mut seen: BTreeMap<usize, (f64, PointStatus)> = BTreeMap::new();
    for (i, &a) in a_values.iter().enumerate() {
        seen.insert(ev.index(a), (sweep.f_values[i], sweep.status[i].clone()));
    }
    let (refinement, refinement_width) = if attained.is_interior() {
        let fmin = sweep.f_values[best];
        let bracketed = [best - 1, best + 1]
            .iter()
            .all(|&k| sweep.status[k].is_usable() && sweep.f_values[k] > fmin + tie_tolerance(fmin));
        let (ilo, ihi) = (ev.index(a_values[best - 1]), ev.index(a_values[best + 1]));
        if bracketed {
            let (a, b) = ev.golden(ilo, ihi, opts.target_width, &mut seen);
            let inside: Vec<f64> =
                seen.range(ilo..=ihi).filter(|(_, (_, s))| s.is_usable()).map(|(_, (v, _))| *v).collect();
            let cert = if is_valley(&inside) { RefineCertificate::Golden } else { RefineCertificate::SampledMin };
            (cert, ev.grid.nodes()[b] - ev.grid.nodes()[a])
        } else {
            (RefineCertificate::SampledMin, a_values[best + 1] - a_values[best - 1])
        }
    } else {
        (RefineCertificate::Unrefined, 0.0)
    };

    let (j, m_estimate) = best_seen(&seen).ok_or(Error::AllPointsFailed)?;
    let certificate = match &seen[&j].1 {
        PointStatus::Solved(c) => *c,
        PointStatus::Failed(_) => unreachable!("best point is usable"),
    };
    let near_minima = seen
        .iter()
        .filter(|(_, (v, s))| s.is_usable() && *v <= m_estimate + tie_tolerance(m_estimate))
        .map(|(&k, _)| ev.grid.nodes()[k])
        .collect();
    Ok(OuterResult {
        m_estimate,
        argmin: ev.grid.nodes()[j],
        attained,
        refinement,
        refinement_width,
        certificate,
        near_minima,
        window,
        sweep,
    })
}

/// Classify a minimum at index 0 of `f`.
fn edge_attainment(f: &[f64], status: &[PointStatus], edge: Edge) -> Attainment {
    let run = EDGE_RUN.min(f.len() - 1);
    let tol = tie_tolerance(f[0]);
    let monotone = (0..run).all(|k| status[k + 1].is_usable() && f[k + 1] >= f[k] - tol);
    if monotone {
        Attainment::BoundarySuspect(edge)
    } else {
        Attainment::WindowEdge(edge)
    }
}

/// Square well `α` outside `(b, c)` and `−β` inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellParams {
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
    pub c: f64,
}

impl WellParams {
    pub fn new(alpha: f64, beta: f64, b: f64, c: f64) -> Result<Self> {
        let w = Self { alpha, beta, b, c };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.b.is_finite() && self.c.is_finite() && self.b < self.c) {
            return Err(Error::InvalidInput(format!("well [{}, {}] is empty", self.b, self.c)));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.c - self.b
    }

    pub fn potential(&self) -> Result<Potential> {
        Potential::well(self.alpha, self.beta, self.b, self.c)
    }
}

/// `√β·(c − b) ≥ π`, evaluated as `β·(c − b)² ≥ π²`.
pub fn trapped_mode_criterion(well: &WellParams) -> Result<bool> {
    well.validate()?;
    Ok(well.beta * well.width() * well.width() >= PI * PI)
}

/// Minimize over a well. When the trapping criterion holds the window is
/// `[b, c]`, unless the options fix one.
pub fn minimize_well(well: &WellParams, opts: &OuterOptions) -> Result<(bool, OuterResult)> {
    let trapped = trapped_mode_criterion(well)?;
    let p = well.potential()?;
    let mut opts = opts.clone();
    if trapped && opts.window.is_none() {
        opts.window = Some((well.b, well.c));
    }
    Ok((trapped, minimize(&p, &opts)?))
}

/// One cell of a `(β, width)` exploration of the trapping criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct TrappedRow {
    pub beta: f64,
    pub width: f64,
    pub criterion: bool,
    pub attained: Attainment,
    pub argmin: f64,
    pub m_estimate: f64,
}

/// Minimize every well `α` outside `(−w/2, w/2)`, `−β` inside, over the
/// grid `betas × widths`. Rows come out in `β`-major input order.
pub fn trapped_grid(alpha: f64, betas: &[f64], widths: &[f64], opts: &OuterOptions) -> Result<Vec<TrappedRow>> {
    let cells: Vec<(f64, f64)> = betas.iter().flat_map(|&b| widths.iter().map(move |&w| (b, w))).collect();
    cells
        .par_iter()
        .map(|&(beta, width)| {
            let well = WellParams::new(alpha, beta, -0.5 * width, 0.5 * width)?;
            let (criterion, r) = minimize_well(&well, opts)?;
            Ok(TrappedRow { beta, width, criterion, attained: r.attained, argmin: r.argmin, m_estimate: r.m_estimate })
        })
        .collect()
}
